use std::sync::Arc;

use nalgebra::DVector;

use super::{AffineProblem, NsdpProblem};
use crate::bench::{
    build_cor, build_cor_ext, build_cor_ext_slack, build_cor_slack, build_hs71, gen_correlation_h,
    CorSlack,
};
use crate::error::{Error, Result};
use crate::nlp::EqualityNlp;
use crate::reformulate::{to_slack, SlackKktPoint, SlackNlp};

/// A registry entry: a conic problem (solved through its slack
/// reformulation) or a problem already written in slack form.
#[derive(Clone)]
pub enum Registered {
    Nsdp(Arc<dyn NsdpProblem>),
    /// A slack form with one slack per diagonal block of `G`.
    Slack(Arc<SlackNlp>),
    /// The correlation problem whose matrix variable is its own slack.
    CorSlack(Arc<CorSlack>),
}

impl Registered {
    pub fn name(&self) -> &str {
        match self {
            Registered::Nsdp(p) => p.name(),
            Registered::Slack(p) => p.name(),
            Registered::CorSlack(p) => p.name(),
        }
    }

    /// The equality-constrained NLP handed to the solver.
    pub fn nlp(&self) -> Arc<dyn EqualityNlp> {
        match self {
            Registered::Nsdp(p) => Arc::new(to_slack(p.clone())),
            Registered::Slack(p) => p.clone(),
            Registered::CorSlack(p) => p.clone(),
        }
    }

    /// The conic problem certificates are checked against.
    pub fn conic(&self) -> Arc<dyn NsdpProblem> {
        match self {
            Registered::Nsdp(p) => p.clone(),
            Registered::Slack(p) => p.base().clone(),
            Registered::CorSlack(p) => Arc::new(p.conic_form()),
        }
    }

    /// Maps an NLP iterate and multipliers to a slack-form point of
    /// [`conic`](Self::conic).
    pub fn kkt_point(&self, z: &DVector<f64>, w: &DVector<f64>) -> SlackKktPoint {
        match self {
            Registered::Nsdp(p) => to_slack(p.clone()).kkt_point(z, w),
            Registered::Slack(p) => p.kkt_point(z, w),
            Registered::CorSlack(p) => p.kkt_point(z, w),
        }
    }
}

/// Instance parameters for the random problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegistryOptions {
    pub m: usize,
    pub seed: u64,
    pub kappa: f64,
}

impl Default for RegistryOptions {
    fn default() -> Self {
        Self {
            m: 5,
            seed: 0,
            kappa: 10.0,
        }
    }
}

const NAMES: [&str; 5] = ["hs71sdp", "cor", "cor-slack", "cor-ext", "cor-ext-slack"];

pub fn registered_names() -> &'static [&'static str] {
    &NAMES
}

/// Builds a registered problem. A name ending in `.json` is loaded as an
/// affine problem file.
pub fn lookup(name: &str, opts: &RegistryOptions) -> Result<Registered> {
    if name.ends_with(".json") {
        return Ok(Registered::Nsdp(Arc::new(AffineProblem::load(name)?)));
    }
    let needs_h = name.starts_with("cor");
    if needs_h && opts.m < 2 {
        return Err(Error::Invalid(format!(
            "{name} needs m ≥ 2, got {}",
            opts.m
        )));
    }
    if name.starts_with("cor-ext") && (opts.kappa.is_nan() || opts.kappa <= 1.0) {
        return Err(Error::Invalid(format!(
            "κ must exceed 1, got {}",
            opts.kappa
        )));
    }
    let h = || gen_correlation_h(opts.m, opts.seed);
    Ok(match name {
        "hs71sdp" => Registered::Nsdp(Arc::new(build_hs71())),
        "cor" => Registered::Nsdp(Arc::new(build_cor(&h()))),
        "cor-slack" => Registered::CorSlack(Arc::new(build_cor_slack(&h()))),
        "cor-ext" => Registered::Nsdp(Arc::new(build_cor_ext(&h(), opts.kappa))),
        "cor-ext-slack" => Registered::Slack(Arc::new(build_cor_ext_slack(&h(), opts.kappa))),
        other => return Err(Error::UnknownProblem(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in registered_names() {
            let p = lookup(name, &RegistryOptions::default()).unwrap();
            assert_eq!(p.name(), *name);
        }
        assert!(matches!(
            lookup("nope", &RegistryOptions::default()),
            Err(Error::UnknownProblem(_))
        ));
        let bad = RegistryOptions {
            kappa: 0.5,
            ..Default::default()
        };
        assert!(lookup("cor-ext", &bad).is_err());
    }
}
