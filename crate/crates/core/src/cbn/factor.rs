//! Dense factors over discrete variables, stored row-major with the last
//! scope variable varying fastest.

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, table: Vec<f64>) -> Self {
        assert_eq!(scope.len(), cards.len());
        assert_eq!(table.len(), cards.iter().product::<usize>());
        debug_assert!(table.iter().all(|&x| x >= 0.0));
        Factor { scope, cards, table }
    }

    /// The factor with empty scope and value 1.
    pub fn unit() -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![1.0])
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![0; self.scope.len()];
        let mut acc = 1;
        for k in (0..self.scope.len()).rev() {
            strides[k] = acc;
            acc *= self.cards[k];
        }
        strides
    }

    /// Stride of each variable of `scope` inside `self` (0 when absent).
    fn strides_for(&self, scope: &[usize]) -> Vec<usize> {
        let own = self.strides();
        scope
            .iter()
            .map(|v| self.scope.iter().position(|s| s == v).map_or(0, |k| own[k]))
            .collect()
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(&v) {
                scope.push(v);
                cards.push(c);
            }
        }
        let sa = self.strides_for(&scope);
        let sb = other.strides_for(&scope);
        let size: usize = cards.iter().product();
        let mut table = Vec::with_capacity(size);
        let mut digits = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            table.push(self.table[ia] * other.table[ib]);
            for k in (0..scope.len()).rev() {
                digits[k] += 1;
                ia += sa[k];
                ib += sb[k];
                if digits[k] < cards[k] {
                    break;
                }
                ia -= sa[k] * cards[k];
                ib -= sb[k] * cards[k];
                digits[k] = 0;
            }
        }
        Factor { scope, cards, table }
    }

    /// Marginalizes `var` out. No-op when `var` is not in scope.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        let out_size: usize = cards.iter().product();
        let mut table = vec![0.0; out_size];
        let target = Factor { scope: scope.clone(), cards: cards.clone(), table: Vec::new() };
        let st = target.strides_for(&self.scope);
        self.for_each_index(&st, |src, dst| table[dst] += self.table[src]);
        Factor { scope, cards, table }
    }

    /// Fixes `var` to `state` and drops it from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        cards.remove(pos);
        let target = Factor { scope: scope.clone(), cards: cards.clone(), table: Vec::new() };
        let st = target.strides_for(&self.scope);
        let mut table = vec![0.0; cards.iter().product()];
        let own = self.strides();
        self.for_each_index(&st, |src, dst| {
            if (src / own[pos]) % self.cards[pos] == state {
                table[dst] = self.table[src];
            }
        });
        Factor { scope, cards, table }
    }

    /// Same factor with the scope permuted into `order` (which must be a
    /// permutation of the scope).
    pub fn reorder(&self, order: &[usize]) -> Factor {
        assert_eq!(order.len(), self.scope.len());
        let cards: Vec<usize> = order
            .iter()
            .map(|v| {
                let k = self.scope.iter().position(|s| s == v).expect("order is a permutation");
                self.cards[k]
            })
            .collect();
        let target = Factor { scope: order.to_vec(), cards: cards.clone(), table: Vec::new() };
        let st = target.strides_for(&self.scope);
        let mut table = vec![0.0; self.table.len()];
        self.for_each_index(&st, |src, dst| table[dst] = self.table[src]);
        Factor { scope: order.to_vec(), cards, table }
    }

    /// Visits every entry of `self` in order, passing its index and the
    /// index computed with `dst_strides` (one stride per own scope variable).
    fn for_each_index(&self, dst_strides: &[usize], mut visit: impl FnMut(usize, usize)) {
        let n = self.scope.len();
        let mut digits = vec![0usize; n];
        let mut dst = 0usize;
        for src in 0..self.table.len() {
            visit(src, dst);
            for k in (0..n).rev() {
                digits[k] += 1;
                dst += dst_strides[k];
                if digits[k] < self.cards[k] {
                    break;
                }
                dst -= dst_strides[k] * self.cards[k];
                digits[k] = 0;
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }
}
