//! Built-in metric files. The `example` command runs these through the
//! same parser as user files.

pub const SIG22: &str = include_str!("../fixtures/sig22.metric");
pub const PPWAVE_ODD: &str = include_str!("../fixtures/ppwave-odd.metric");
pub const PPWAVE_EVEN: &str = include_str!("../fixtures/ppwave-even.metric");
pub const HEISENBERG_SEMIDIRECT: &str = include_str!("../fixtures/heisenberg-semidirect.metric");
pub const EINSTEIN_H3: &str = include_str!("../fixtures/einstein-h3.metric");
pub const FLAT: &str = include_str!("../fixtures/flat.metric");
pub const NON_WALKER: &str = include_str!("../fixtures/non-walker.metric");

/// Names accepted by the `example` command.
pub const EXAMPLES: [&str; 5] = [
    "sig22",
    "ppwave-odd",
    "ppwave-even",
    "heisenberg-semidirect",
    "einstein-h3",
];

pub fn example_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "sig22" => SIG22,
        "ppwave-odd" => PPWAVE_ODD,
        "ppwave-even" => PPWAVE_EVEN,
        "heisenberg-semidirect" => HEISENBERG_SEMIDIRECT,
        "einstein-h3" => EINSTEIN_H3,
        _ => return None,
    })
}
