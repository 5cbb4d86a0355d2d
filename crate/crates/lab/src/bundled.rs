//! Scenario files shipped with the binary.

pub const SCENARIOS: &[(&str, &str)] = &[
    ("eq1_causality", include_str!("../scenarios/eq1_causality.scn")),
    ("hartman_scan", include_str!("../scenarios/hartman_scan.scn")),
    ("larmor_dwell_map", include_str!("../scenarios/larmor_dwell_map.scn")),
    ("two_field_cancellation", include_str!("../scenarios/two_field_cancellation.scn")),
    ("delta_kick_fig2", include_str!("../scenarios/delta_kick_fig2.scn")),
    ("fig3_sweep", include_str!("../scenarios/fig3_sweep.scn")),
    ("well_decay", include_str!("../scenarios/well_decay.scn")),
];

pub fn get(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(n, _)| *n)
}
