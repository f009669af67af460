//! JSON input formats: scenario files, bipartite states and ensembles.

use std::collections::BTreeMap;
use std::fmt;

use lhv_core::assembly::{ConstraintSet, MixtureMode, Options, Scenario};
use lhv_core::builders;
use lhv_core::qubit::{OverlapTriple, PureState, Vec3, WeightedEnsemble};
use lhv_core::steering::{BipartitePureState, CMatrix};
use num_complex::Complex64;
use serde::Deserialize;

/// Rejected input, with enough context to find the offending spot.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn invalid(path: impl fmt::Display, msg: impl fmt::Display) -> InputError {
    InputError(format!("{path}: {msg}"))
}

/// Parses JSON, reporting line, column and the failing field.
pub fn parse_json<T: for<'de> Deserialize<'de>>(source: &str, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError(format!("{source}: {e}")))
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Bloch([f64; 3]),
    Amp([[f64; 2]; 2]),
}

impl StateSpec {
    pub fn to_state(self) -> lhv_core::Result<PureState> {
        match self {
            StateSpec::Bloch(b) => PureState::from_bloch(b),
            StateSpec::Amp([a, b]) => {
                PureState::from_amplitudes(Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1]))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub p: f64,
    pub state: StateSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureModeSpec {
    Full,
    SupportOnly,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSetSpec {
    PaperStrict,
    AllPairs,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsSpec {
    pub deficiency: bool,
    pub mixture_mode: MixtureModeSpec,
    pub constraint_set: ConstraintSetSpec,
    pub werner_w: f64,
}

impl Default for OptionsSpec {
    fn default() -> Self {
        Self {
            deficiency: false,
            mixture_mode: MixtureModeSpec::Full,
            constraint_set: ConstraintSetSpec::PaperStrict,
            werner_w: 1.0,
        }
    }
}

impl From<OptionsSpec> for Options {
    fn from(o: OptionsSpec) -> Self {
        Options {
            deficiency: o.deficiency,
            mixture_mode: match o.mixture_mode {
                MixtureModeSpec::Full => MixtureMode::Full,
                MixtureModeSpec::SupportOnly => MixtureMode::SupportOnly,
            },
            constraint_set: match o.constraint_set {
                ConstraintSetSpec::PaperStrict => ConstraintSet::PaperStrict,
                ConstraintSetSpec::AllPairs => ConstraintSet::AllPairs,
            },
            werner_w: o.werner_w,
        }
    }
}

/// Either explicit ensembles or a named builder; `options` applies to both.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub ensembles: Option<Vec<Vec<MemberSpec>>>,
    #[serde(default)]
    pub labels: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub builder: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub options: Option<OptionsSpec>,
}

/// Named builder plus numeric parameters, as given on the command line or
/// in a scenario file.
#[derive(Debug, Clone, Default)]
pub struct BuilderCall {
    pub name: String,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl BuilderCall {
    fn number(&self, key: &str) -> Result<f64, InputError> {
        let field = format!("params.{key}");
        match self.params.get(key) {
            None => Err(invalid(field, format!("missing for builder `{}`", self.name))),
            Some(v) => v.as_f64().ok_or_else(|| invalid(field, "expected a number")),
        }
    }

    fn directions(&self) -> Result<Vec<Vec3>, InputError> {
        let raw = self
            .params
            .get("directions")
            .ok_or_else(|| invalid("params.directions", "missing for builder `werner`"))?;
        serde_json::from_value(raw.clone()).map_err(|e| invalid("params.directions", e))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), InputError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(invalid(
                format!("params.{k}"),
                format!("unknown parameter for builder `{}`, expected one of {allowed:?}", self.name),
            )),
            None => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Scenario, InputError> {
        let core = |e: lhv_core::Error| invalid("params", e);
        match self.name.as_str() {
            "two_orthogonal" => {
                self.check_keys(&["alpha"])?;
                builders::two_orthogonal(self.number("alpha")?).map_err(core)
            }
            "nonorthogonal_pair" => {
                self.check_keys(&["theta"])?;
                builders::nonorthogonal_pair(self.number("theta")?).map_err(core)
            }
            "three_orthogonal" => {
                self.check_keys(&["alpha", "beta", "gamma"])?;
                let t = OverlapTriple::new(self.number("alpha")?, self.number("beta")?, self.number("gamma")?)
                    .map_err(core)?;
                builders::three_orthogonal(t).map_err(core)
            }
            "gpr" => {
                self.check_keys(&["q"])?;
                builders::gpr(self.number("q")?).map_err(core)
            }
            "werner" => {
                self.check_keys(&["w", "directions"])?;
                builders::werner(self.number("w")?, &self.directions()?).map_err(core)
            }
            other => Err(invalid(
                "builder",
                format!(
                    "unknown builder `{other}`, expected one of two_orthogonal, nonorthogonal_pair, \
                     three_orthogonal, gpr, werner"
                ),
            )),
        }
    }
}

fn ensembles_from_specs(specs: &[Vec<MemberSpec>]) -> Result<Vec<WeightedEnsemble>, InputError> {
    specs
        .iter()
        .enumerate()
        .map(|(e, members)| {
            let states = members
                .iter()
                .enumerate()
                .map(|(m, spec)| {
                    let s = spec.state.to_state().map_err(|err| invalid(format!("ensembles[{e}][{m}].state"), err))?;
                    Ok((spec.p, s))
                })
                .collect::<Result<Vec<_>, InputError>>()?;
            WeightedEnsemble::new(states).map_err(|err| invalid(format!("ensembles[{e}]"), err))
        })
        .collect()
}

impl ScenarioFile {
    /// Resolves the file into a validated scenario. Options given in the
    /// file replace the builder's defaults wholesale.
    pub fn into_scenario(self) -> Result<Scenario, InputError> {
        let scenario = match (self.ensembles, self.builder) {
            (Some(_), Some(_)) => return Err(invalid("builder", "give either `ensembles` or `builder`, not both")),
            (None, None) => return Err(invalid("ensembles", "missing field (or give `builder`)")),
            (None, Some(name)) => {
                if self.labels.is_some() {
                    return Err(invalid("labels", "not allowed with `builder`"));
                }
                BuilderCall { name, params: self.params }.build()?
            }
            (Some(specs), None) => {
                if !self.params.is_empty() {
                    return Err(invalid("params", "only allowed with `builder`"));
                }
                let ensembles = ensembles_from_specs(&specs)?;
                let s = Scenario::new(ensembles, Options::default()).map_err(|e| invalid("ensembles", e))?;
                match self.labels {
                    Some(l) => s.with_labels(l).map_err(|e| invalid("labels", e))?,
                    None => s,
                }
            }
        };
        match self.options {
            Some(o) => apply_options(scenario, o.into()),
            None => Ok(scenario),
        }
    }
}

/// Replaces a scenario's options, validating the visibility.
pub fn apply_options(scenario: Scenario, o: Options) -> Result<Scenario, InputError> {
    scenario
        .with_deficiency(o.deficiency)
        .with_mixture_mode(o.mixture_mode)
        .with_constraint_set(o.constraint_set)
        .with_werner_w(o.werner_w)
        .map_err(|e| invalid("options.werner_w", e))
}

/// Bipartite pure state file: `{"coeffs": [[[re,im],[re,im]], ...]}`, one
/// row per basis state of A, columns indexed by the qubit B.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub coeffs: Vec<[[f64; 2]; 2]>,
}

/// Coefficients are renormalized only if they are already unit norm to
/// within this tolerance; anything further off is a typo.
const NORM_SLACK: f64 = 1e-6;

impl StateFile {
    pub fn to_state(&self) -> Result<BipartitePureState, InputError> {
        let rows: Vec<Vec<Complex64>> = self
            .coeffs
            .iter()
            .map(|r| r.iter().map(|z| Complex64::new(z[0], z[1])).collect())
            .collect();
        let norm: f64 = rows.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= NORM_SLACK) {
            return Err(invalid("coeffs", format!("state must have unit norm, got {norm}")));
        }
        let m = CMatrix::from_rows(&rows).map_err(|e| invalid("coeffs", e))?;
        BipartitePureState::normalized(m).map_err(|e| invalid("coeffs", e))
    }
}

pub fn ensemble_from_members(members: &[MemberSpec]) -> Result<WeightedEnsemble, InputError> {
    let mut out = ensembles_from_specs(&[members.to_vec()])?;
    Ok(out.remove(0))
}
