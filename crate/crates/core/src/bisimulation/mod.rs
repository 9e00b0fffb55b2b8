//! Decision procedures, bounded refutation games, and certificate checking.

mod certificate;
mod det;
mod game;
mod partition;

pub use certificate::{
    check_certificate, fill_responses, parse_certificate, render_certificate, CertVerdict, Certificate, DefenderSpec,
    Response, StepSpec, Target,
};
pub use det::{dist_bisim_det, DetVerdict};
pub use game::{
    action_set_text, dist_bisim_refute, Attack, Counterexample, Defender, DefenderFailure, Game, RefuteOutcome,
    Semantics, Side,
};
pub use partition::{block_projection, prob_bisim, Partition};
