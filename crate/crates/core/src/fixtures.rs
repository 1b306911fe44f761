//! Built-in example models.

use std::collections::BTreeMap;

use crate::cbn::{CausalBayesianNetwork, CptRowEntry, ModelDocument, Variable, VariableEntry};
use crate::ontology::{CausalRole, RoleMapping};

pub const EXAMPLES: [&str; 1] = ["collision"];

pub const COLLISION_BASE_IRI: &str = "http://example.org/ad#";

/// Highway collision network. Every variable is binary `{false, true}` with
/// values `{0, 1}`.
pub fn collision_document() -> ModelDocument {
    let root = |name: &str, p: f64| binary(name, &[], &[("", p)]);
    ModelDocument {
        variables: vec![
            root("CellphoneUse", 0.3),
            root("Alcohol", 0.1),
            root("Snow", 0.2),
            root("Rain", 0.25),
            binary(
                "DriverDistraction",
                &["CellphoneUse", "Alcohol"],
                &[("FF", 0.05), ("TF", 0.6), ("FT", 0.5), ("TT", 0.85)],
            ),
            binary(
                "SlipperyRoad",
                &["Snow", "Rain"],
                &[("FF", 0.02), ("TF", 0.7), ("FT", 0.5), ("TT", 0.9)],
            ),
            binary(
                "SuddenLaneChange",
                &["DriverDistraction", "SlipperyRoad"],
                &[("FF", 0.05), ("TF", 0.4), ("FT", 0.3), ("TT", 0.6)],
            ),
            binary(
                "Collision",
                &["SuddenLaneChange", "DriverDistraction", "SlipperyRoad"],
                &[
                    ("FFF", 0.01),
                    ("TFF", 0.2),
                    ("FTF", 0.1),
                    ("FFT", 0.08),
                    ("TTF", 0.45),
                    ("TFT", 0.35),
                    ("FTT", 0.2),
                    ("TTT", 0.6),
                ],
            ),
        ],
    }
}

pub fn collision() -> CausalBayesianNetwork {
    CausalBayesianNetwork::from_document(&collision_document()).expect("collision fixture is valid")
}

/// Treatment DriverDistraction, mediator SuddenLaneChange, outcome Collision;
/// everything else is context.
pub fn collision_roles() -> RoleMapping {
    let mut roles = RoleMapping::new(COLLISION_BASE_IRI)
        .with_role("DriverDistraction", CausalRole::Treatment)
        .with_mediator("SuddenLaneChange", "DriverDistraction", "Collision")
        .with_role("Collision", CausalRole::Outcome);
    roles.prefix = Some("ad".to_string());
    roles
}

/// `rows` gives P(true) per parent configuration, written as one `T`/`F`
/// letter per parent in declaration order.
fn binary(name: &str, parents: &[&str], rows: &[(&str, f64)]) -> VariableEntry {
    let cpt = rows
        .iter()
        .map(|(pattern, p)| {
            let given: BTreeMap<String, String> = parents
                .iter()
                .zip(pattern.chars())
                .map(|(parent, c)| (parent.to_string(), if c == 'T' { "true" } else { "false" }.to_string()))
                .collect();
            let dist = BTreeMap::from([("false".to_string(), 1.0 - p), ("true".to_string(), *p)]);
            CptRowEntry { given, dist }
        })
        .collect();
    VariableEntry {
        variable: Variable::binary(name).with_parents(parents.iter().copied()).with_values(vec![0.0, 1.0]),
        cpt,
    }
}

/// Sample queries for the collision example, one per explanation level.
pub const COLLISION_QUERIES: [(&str, &str); 3] = [
    ("Basic cause (total causal effect)", "TCE(DriverDistraction -> Collision)"),
    (
        "Direct cause (natural direct effect)",
        "NDE(DriverDistraction -> Collision | via SuddenLaneChange)",
    ),
    (
        "Indirect cause (natural indirect effect)",
        "NIE(DriverDistraction -> Collision | via SuddenLaneChange)",
    ),
];

/// README written next to the example files.
pub fn collision_readme() -> String {
    let mut out = String::from(
        "# Collision example\n\n\
         `collision.json` is a causal Bayesian network of a highway scene:\n\
         phone use and alcohol feed driver distraction, snow and rain make the\n\
         road slippery, and distraction or a slippery road can trigger a sudden\n\
         lane change. Collision depends on the lane change, the distraction and\n\
         the road. `roles.json` marks DriverDistraction as treatment,\n\
         SuddenLaneChange as mediator and Collision as outcome.\n\n\
         Build the knowledge graph:\n\n\
         ```sh\n\
         causalkg build collision.json --roles roles.json -o collision.ttls\n\
         ```\n",
    );
    for (title, query) in COLLISION_QUERIES {
        out.push_str(&format!(
            "\n## {title}\n\n```sh\ncausalkg query collision.json \"{query}\"\n```\n"
        ));
    }
    out.push_str(
        "\nAdd `--kg collision.ttls --explain` to any query for a textual\n\
         explanation citing the causal paths in the graph.\n",
    );
    out
}
