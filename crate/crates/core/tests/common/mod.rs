//! Random model generators and brute-force oracles shared by the
//! integration tests. The oracles only read CPT rows; they never call the
//! library's inference, intervention or mediation code.

#![allow(dead_code)]

use causalkg::cbn::{CausalBayesianNetwork, Variable};
use causalkg::kg::{CausalKnowledgeGraph, Literal, Statement, Term, XSD_DOUBLE};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Rng8 = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- generators

fn binary_row(rng: &mut Rng8) -> Vec<f64> {
    let p = rng.gen_range(0.02..0.98);
    vec![1.0 - p, p]
}

/// Random DAG on `V0..V{n-1}` (index order is topological) with random
/// binary CPTs.
pub fn random_network(rng: &mut Rng8, min_vars: usize, max_vars: usize) -> CausalBayesianNetwork {
    let n = rng.gen_range(min_vars..=max_vars);
    let density = rng.gen_range(0.2..0.8);
    let mut parts = Vec::new();
    for i in 0..n {
        let parents: Vec<String> = (0..i).filter(|_| rng.gen_bool(density)).map(|p| format!("V{p}")).collect();
        let rows = (0..1usize << parents.len()).map(|_| binary_row(rng)).collect();
        parts.push((Variable::binary(format!("V{i}")).with_parents(parents), rows));
    }
    CausalBayesianNetwork::from_parts(parts).expect("generated model is valid")
}

/// Roots carry random priors; every other CPT row is a random point mass, so
/// the roots are the only source of randomness.
pub fn deterministic_scm(rng: &mut Rng8, min_vars: usize, max_vars: usize) -> CausalBayesianNetwork {
    let n = rng.gen_range(min_vars..=max_vars);
    let mut parts = Vec::new();
    for i in 0..n {
        let parents: Vec<String> = (0..i).filter(|_| rng.gen_bool(0.5)).map(|p| format!("V{p}")).collect();
        let rows = if parents.is_empty() {
            vec![binary_row(rng)]
        } else {
            (0..1usize << parents.len())
                .map(|_| if rng.gen_bool(0.5) { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                .collect()
        };
        parts.push((Variable::binary(format!("V{i}")).with_parents(parents), rows));
    }
    CausalBayesianNetwork::from_parts(parts).expect("generated model is valid")
}

/// A model with treatment `V0 -> mediator -> outcome` and `V0 -> outcome`
/// where the mediator's CPT does not depend on the treatment. The mediator's
/// other parents are never descendants of the treatment.
pub fn ignoring_mediator(rng: &mut Rng8) -> (CausalBayesianNetwork, String, String, String) {
    let n = rng.gen_range(3..=6);
    let m = rng.gen_range(1..n - 1);
    let y = rng.gen_range(m + 1..n);
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, ps) in parents.iter_mut().enumerate() {
        *ps = (0..i).filter(|_| rng.gen_bool(0.4)).collect();
    }
    // descendants of V0 without the mediator's influence
    parents[m].retain(|&p| p != 0);
    let mut downstream = vec![false; n];
    downstream[0] = true;
    for i in 1..n {
        if i != m {
            downstream[i] = parents[i].iter().any(|&p| downstream[p]);
        }
    }
    parents[m].retain(|&p| !downstream[p]);
    parents[m].insert(0, 0);
    for required in [0, m] {
        if !parents[y].contains(&required) {
            parents[y].push(required);
        }
    }
    parents[y].sort_unstable();
    let mut parts = Vec::new();
    for i in 0..n {
        let rows: Vec<Vec<f64>> = if i == m {
            // first parent is the treatment: the two halves of the table repeat
            let half: Vec<Vec<f64>> = (0..1usize << (parents[i].len() - 1)).map(|_| binary_row(rng)).collect();
            half.iter().chain(half.iter()).cloned().collect()
        } else {
            (0..1usize << parents[i].len()).map(|_| binary_row(rng)).collect()
        };
        let var = Variable::binary(format!("V{i}")).with_parents(parents[i].iter().map(|p| format!("V{p}")));
        parts.push((var, rows));
    }
    let model = CausalBayesianNetwork::from_parts(parts).expect("generated model is valid");
    (model, "V0".into(), format!("V{m}"), format!("V{y}"))
}

pub fn random_kg(rng: &mut Rng8, max_depth: usize) -> CausalKnowledgeGraph {
    const NAMESPACES: [(&str, &str); 4] = [
        ("ex", "http://ex.org/a#"),
        ("b", "http://ex.org/b/"),
        ("urn", "urn:x:"),
        ("", "http://empty.example/"),
    ];
    let mut kg = CausalKnowledgeGraph::new();
    for (prefix, ns) in NAMESPACES {
        if rng.gen_bool(0.7) {
            kg.add_prefix(prefix, ns);
        }
    }
    let statements = rng.gen_range(1..40);
    for i in 0..statements {
        // the first statement guarantees the requested depth appears
        let depth = if i == 0 { max_depth } else { rng.gen_range(0..=max_depth) };
        let subject = random_subject(rng, depth);
        let object = if rng.gen_bool(0.3) {
            let depth = rng.gen_range(1..=max_depth.max(1));
            random_embedded(rng, depth)
        } else {
            random_object(rng)
        };
        kg.insert(Statement::new(subject, random_iri(rng), object)).expect("generated statement is valid");
    }
    kg
}

fn random_iri(rng: &mut Rng8) -> String {
    const NS: [&str; 5] = ["http://ex.org/a#", "http://ex.org/b/", "urn:x:", "http://empty.example/", "http://unprefixed.org/"];
    const PIECES: [&str; 14] = ["A", "b", "Collision", "x1", "_u", "-", ".", "%20", "/", "~", "é", "9", "causes", "#"];
    let ns = NS.choose(rng).unwrap();
    let local: String = (0..rng.gen_range(0..5)).map(|_| *PIECES.choose(rng).unwrap()).collect();
    format!("{ns}{local}")
}

fn random_subject(rng: &mut Rng8, depth: usize) -> Term {
    if depth == 0 {
        Term::Iri(random_iri(rng))
    } else {
        random_embedded(rng, depth)
    }
}

fn random_embedded(rng: &mut Rng8, depth: usize) -> Term {
    let inner = depth - 1;
    let subject = random_subject(rng, inner);
    let object = if inner > 0 && rng.gen_bool(0.5) { random_embedded(rng, inner) } else { random_object(rng) };
    Term::triple(subject, random_iri(rng), object)
}

fn random_object(rng: &mut Rng8) -> Term {
    match rng.gen_range(0..5) {
        0 | 1 => Term::Iri(random_iri(rng)),
        2 => {
            let v = match rng.gen_range(0..4) {
                0 => rng.gen_range(-100.0..100.0),
                1 => (rng.gen_range(-2000..2000) as f64) / 100.0,
                2 => f64::from_bits(rng.gen::<u64>() & !(0x7ffu64 << 52)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                _ => rng.gen::<f64>() * 10f64.powi(rng.gen_range(-300..300)),
            };
            Term::Literal(Literal::double(v).expect("finite"))
        }
        3 => {
            const CHARS: [&str; 12] = ["a", "Z", " ", "\"", "\\", "\n", "\r", "\t", "é", "🚗", "\u{1}", "'"];
            let text: String = (0..rng.gen_range(0..8)).map(|_| *CHARS.choose(rng).unwrap()).collect();
            Term::Literal(Literal::string(text))
        }
        _ => {
            let (lex, dt) = [
                ("42", "http://www.w3.org/2001/XMLSchema#integer"),
                ("true", "http://www.w3.org/2001/XMLSchema#boolean"),
                ("x y", "http://ex.org/dt"),
                ("1.50", XSD_DOUBLE),
            ]
            .choose(rng)
            .copied()
            .unwrap();
            Term::Literal(Literal::typed(lex, dt).expect("valid literal"))
        }
    }
}

// ------------------------------------------------------------------- oracles

fn cards(model: &CausalBayesianNetwork) -> Vec<usize> {
    model.variables().iter().map(|v| v.cardinality()).collect()
}

/// Every full assignment of the model's variables.
pub fn full_assignments(model: &CausalBayesianNetwork) -> Vec<Vec<usize>> {
    let cards = cards(model);
    let mut out = vec![Vec::new()];
    for &c in &cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c).map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out
}

fn mechanism(model: &CausalBayesianNetwork, v: usize, full: &[usize]) -> Vec<f64> {
    let ps: Vec<usize> = model.parents_of(v).iter().map(|&p| full[p]).collect();
    model.cpt(v).row(&ps).to_vec()
}

/// Truncated-factorization joint probability under `do_set`.
pub fn oracle_joint(model: &CausalBayesianNetwork, full: &[usize], do_set: &[(usize, usize)]) -> f64 {
    (0..model.len())
        .map(|v| match do_set.iter().find(|(d, _)| *d == v) {
            Some(&(_, s)) => (full[v] == s) as u8 as f64,
            None => mechanism(model, v, full)[full[v]],
        })
        .product()
}

/// `P(targets | do(do_set), evidence)` as a row-major table over target
/// states, last target fastest. `None` when the evidence has zero mass.
pub fn oracle_query(
    model: &CausalBayesianNetwork,
    targets: &[usize],
    evidence: &[(usize, usize)],
    do_set: &[(usize, usize)],
) -> Option<Vec<f64>> {
    let cards = cards(model);
    let size: usize = targets.iter().map(|&t| cards[t]).product();
    let mut table = vec![0.0; size];
    for full in full_assignments(model) {
        if evidence.iter().any(|&(v, s)| full[v] != s) {
            continue;
        }
        let p = oracle_joint(model, &full, do_set);
        let idx = targets.iter().fold(0, |acc, &t| acc * cards[t] + full[t]);
        table[idx] += p;
    }
    let total: f64 = table.iter().sum();
    (total > 0.0).then(|| table.into_iter().map(|p| p / total).collect())
}

pub fn oracle_expectation(model: &CausalBayesianNetwork, outcome: usize, do_set: &[(usize, usize)]) -> f64 {
    let dist = oracle_query(model, &[outcome], &[], do_set).expect("no evidence");
    dist.iter().enumerate().map(|(s, p)| model.variable(outcome).value(s) * p).sum()
}

/// Probability that a shared uniform noise draw lands in state `a` under the
/// first row and state `b` under the second (inverse-CDF coupling).
fn coupled(first: &[f64], second: &[f64], a: usize, b: usize) -> f64 {
    let lo1: f64 = first[..a].iter().sum();
    let lo2: f64 = second[..b].iter().sum();
    let hi1 = lo1 + first[a];
    let hi2 = lo2 + second[b];
    (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
}

/// `E[Y_{direct, M_{through}}]` in a twin network: world A sets the treatment
/// to `through` and yields the mediator; world B sets the treatment to
/// `direct`, takes the mediator from world A, and yields the outcome. Both
/// worlds share every variable's noise.
pub fn oracle_cross_world(
    model: &CausalBayesianNetwork,
    treatment: usize,
    mediator: usize,
    outcome: usize,
    direct: usize,
    through: usize,
) -> f64 {
    let n = model.len();
    let order: Vec<usize> = model.topological_order().to_vec();
    let mut world_a = vec![0usize; n];
    let mut world_b = vec![0usize; n];
    let mut total = 0.0;
    let ctx = Twin {
        model,
        order: &order,
        treatment,
        mediator,
        outcome,
        direct,
        through,
    };
    ctx.walk(0, 1.0, &mut world_a, &mut world_b, &mut total);
    total
}

struct Twin<'a> {
    model: &'a CausalBayesianNetwork,
    order: &'a [usize],
    treatment: usize,
    mediator: usize,
    outcome: usize,
    direct: usize,
    through: usize,
}

impl Twin<'_> {
    fn walk(&self, k: usize, weight: f64, a: &mut Vec<usize>, b: &mut Vec<usize>, total: &mut f64) {
        if weight == 0.0 {
            return;
        }
        if k == self.order.len() {
            *total += weight * self.model.variable(self.outcome).value(b[self.outcome]);
            return;
        }
        let v = self.order[k];
        if v == self.treatment {
            a[v] = self.through;
            b[v] = self.direct;
            return self.walk(k + 1, weight, a, b, total);
        }
        let row_a = mechanism(self.model, v, a);
        if v == self.mediator {
            for s in 0..row_a.len() {
                a[v] = s;
                b[v] = s;
                self.walk(k + 1, weight * row_a[s], a, b, total);
            }
            return;
        }
        let row_b = mechanism(self.model, v, b);
        for sa in 0..row_a.len() {
            for sb in 0..row_b.len() {
                a[v] = sa;
                b[v] = sb;
                self.walk(k + 1, weight * coupled(&row_a, &row_b, sa, sb), a, b, total);
            }
        }
    }
}

pub struct OracleEffects {
    pub tce: f64,
    pub nde: f64,
    pub nie: f64,
    pub nie_reversed: f64,
}

/// Effects for states `t0 = 0`, `t1 = 1` of a binary treatment.
pub fn oracle_effects(model: &CausalBayesianNetwork, treatment: usize, mediator: usize, outcome: usize) -> OracleEffects {
    let theta = |direct, through| oracle_cross_world(model, treatment, mediator, outcome, direct, through);
    let tce = oracle_expectation(model, outcome, &[(treatment, 1)]) - oracle_expectation(model, outcome, &[(treatment, 0)]);
    OracleEffects {
        tce,
        nde: theta(1, 0) - theta(0, 0),
        nie: theta(0, 1) - theta(0, 0),
        nie_reversed: theta(1, 0) - theta(1, 1),
    }
}

/// Exact probability of necessity in a model whose only randomness is in
/// its roots: enumerate root contexts, replay each one under the other cause
/// state, and weigh contexts where cause and outcome both held.
/// `None` when `P(x, y) = 0`.
pub fn oracle_pn(model: &CausalBayesianNetwork, cause: usize, x: usize, outcome: usize, y: usize) -> Option<f64> {
    let roots: Vec<usize> = (0..model.len()).filter(|&v| model.parents_of(v).is_empty()).collect();
    let order = model.topological_order().to_vec();
    let solve = |context: &[usize], forced: Option<(usize, usize)>| {
        let mut full = vec![0usize; model.len()];
        for &v in &order {
            full[v] = match forced {
                Some((f, s)) if f == v => s,
                _ if model.parents_of(v).is_empty() => context[v],
                _ => {
                    let row = mechanism(model, v, &full);
                    row.iter().position(|&p| p == 1.0).expect("deterministic row")
                }
            };
        }
        full
    };
    let mut joint = 0.0;
    let mut necessary = 0.0;
    let mut context = vec![0usize; model.len()];
    let combos = 1usize << roots.len();
    for bits in 0..combos {
        let mut weight = 1.0;
        for (i, &r) in roots.iter().enumerate() {
            context[r] = (bits >> i) & 1;
            weight *= model.cpt(r).rows()[0][context[r]];
        }
        let actual = solve(&context, None);
        if actual[cause] != x || actual[outcome] != y {
            continue;
        }
        joint += weight;
        let alternative = solve(&context, Some((cause, 1 - x)));
        if alternative[outcome] != y {
            necessary += weight;
        }
    }
    (joint > 0.0).then(|| necessary / joint)
}

/// The lower and upper necessity bounds recomputed from oracle
/// distributions, for binary cause and outcome.
pub fn oracle_pn_bounds(model: &CausalBayesianNetwork, cause: usize, x: usize, outcome: usize, y: usize) -> Option<(f64, f64)> {
    let joint = oracle_query(model, &[cause, outcome], &[], &[])?;
    let p = |i: usize, j: usize| joint[i * 2 + j];
    let p_xy = p(x, y);
    if p_xy == 0.0 {
        return None;
    }
    let p_y = p(0, y) + p(1, y);
    let p_y_do = oracle_query(model, &[outcome], &[], &[(cause, 1 - x)])?[y];
    let lo = ((p_y - p_y_do) / p_xy).max(0.0);
    let hi = (((1.0 - p_y_do) - p(1 - x, 1 - y)) / p_xy).min(1.0);
    Some((lo, hi))
}
