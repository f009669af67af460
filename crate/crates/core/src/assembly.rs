//! Scenario description and translation into a linear feasibility system.
//!
//! Row families:
//! - `norm[μ]`: every preparation's masses sum to one;
//! - `born[μ->φ]`: a preparation's mass on the support of φ (plus response
//!   masses on free atoms in deficiency mode) equals the outcome probability;
//! - `mix[Ek@j]`: on every atom, ν equals the weighted mixture of ensemble k;
//! - `resp[μ(φ)@j]`: a response mass never exceeds the underlying mass.
//!
//! Noisy scenarios (`werner_w < 1`) describe the steered states
//! `w|μ⟩⟨μ| + (1−w)I/2` of a Werner state. Their masses may occupy every atom
//! and are pinned by Born rows with right-hand side `w|⟨φ|μ⟩|² + (1−w)/2`,
//! including the self row `born[μ->μ]`. At `w = 1` the pure system is used
//! unchanged.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::qubit::{ensemble_average, overlap, MixedState, OverlapTriple, PureState, WeightedEnsemble};
use crate::structure::{
    born_pairs, enumerate_atoms, has_state_mass, index_variables, response_status, ResponseStatus, StateRef,
    SupportAtom, Variable, VariableIndex, ORTH_EPS,
};
use crate::system::{ConstraintSystem, Relation};

/// Entrywise tolerance for the common-average check.
pub const AVERAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureMode {
    /// ν equals every ensemble's weighted mixture, atom by atom.
    #[default]
    Full,
    /// Only the shared support structure is imposed.
    SupportOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstraintSet {
    #[default]
    PaperStrict,
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub deficiency: bool,
    pub mixture_mode: MixtureMode,
    pub constraint_set: ConstraintSet,
    pub werner_w: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            deficiency: false,
            mixture_mode: MixtureMode::Full,
            constraint_set: ConstraintSet::PaperStrict,
            werner_w: 1.0,
        }
    }
}

impl Options {
    pub fn is_noisy(&self) -> bool {
        self.werner_w < 1.0
    }
}

/// Which canned construction produced a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    TwoOrthogonal { alpha: f64 },
    NonorthogonalPair { theta: f64 },
    ThreeOrthogonal { triple: OverlapTriple },
    Gpr { q: f64 },
    Werner { w: f64 },
}

/// Ensembles decomposing a common reduced state, plus assembly options.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    ensembles: Vec<WeightedEnsemble>,
    labels: Vec<Vec<String>>,
    pub options: Options,
    origin: Option<Origin>,
}

impl Scenario {
    pub fn new(ensembles: Vec<WeightedEnsemble>, options: Options) -> Result<Self> {
        let labels = ensembles
            .iter()
            .enumerate()
            .map(|(e, ens)| (0..ens.len()).map(|m| format!("s{}.{}", e + 1, m + 1)).collect())
            .collect();
        let s = Self { ensembles, labels, options, origin: None };
        s.validate()?;
        Ok(s)
    }

    /// Replaces the state labels used in variable and row names.
    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        let shape_ok = labels.len() == self.ensembles.len()
            && labels.iter().zip(&self.ensembles).all(|(l, e)| l.len() == e.len());
        if !shape_ok {
            return Err(Error::InvalidInput("label shape must match the ensembles"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub(crate) fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn with_deficiency(mut self, on: bool) -> Self {
        self.options.deficiency = on;
        self
    }

    pub fn with_mixture_mode(mut self, mode: MixtureMode) -> Self {
        self.options.mixture_mode = mode;
        self
    }

    pub fn with_constraint_set(mut self, set: ConstraintSet) -> Self {
        self.options.constraint_set = set;
        self
    }

    pub fn with_werner_w(mut self, w: f64) -> Result<Self> {
        self.options.werner_w = w;
        self.validate()?;
        Ok(self)
    }

    /// Checks the common-average invariant and the noise parameter.
    pub fn validate(&self) -> Result<()> {
        let first = self.ensembles.first().ok_or(Error::InvalidInput("scenario needs an ensemble"))?;
        let avg = ensemble_average(first);
        let mut worst: f64 = 0.0;
        for e in &self.ensembles[1..] {
            worst = worst.max(avg.max_deviation(&ensemble_average(e)));
        }
        if worst > AVERAGE_TOL {
            return Err(Error::InconsistentEnsembles { max_deviation: worst });
        }
        let w = self.options.werner_w;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidInput("werner_w must lie in [0, 1]"));
        }
        if self.options.is_noisy() && avg.max_deviation(&MixedState::maximally_mixed()) > AVERAGE_TOL {
            return Err(Error::NotMaximallyMixed);
        }
        Ok(())
    }

    pub fn ensembles(&self) -> &[WeightedEnsemble] {
        &self.ensembles
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn state(&self, r: StateRef) -> &PureState {
        self.ensembles[r.ensemble].state(r.member)
    }

    pub fn weight(&self, r: StateRef) -> f64 {
        self.ensembles[r.ensemble].weight(r.member)
    }

    pub fn label(&self, r: StateRef) -> &str {
        &self.labels[r.ensemble][r.member]
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn state_refs(&self) -> impl Iterator<Item = StateRef> + '_ {
        self.ensembles
            .iter()
            .enumerate()
            .flat_map(|(e, ens)| (0..ens.len()).map(move |m| StateRef::new(e, m)))
    }

    pub fn find_state(&self, label: &str) -> Option<StateRef> {
        self.state_refs().find(|&r| self.label(r) == label)
    }

    /// The reduced state shared by all ensembles.
    pub fn common_average(&self) -> MixedState {
        ensemble_average(&self.ensembles[0])
    }
}

/// The assembled system together with the structure it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub atoms: Vec<SupportAtom>,
    pub index: VariableIndex,
    pub system: ConstraintSystem,
}

impl Assembly {
    pub fn var(&self, v: &Variable) -> Option<usize> {
        self.index.get(v)
    }
}

/// Human-readable variable name, atoms numbered from 1.
pub fn variable_label(scenario: &Scenario, v: &Variable) -> String {
    match *v {
        Variable::BaseMass(j) => format!("nu@{}", j + 1),
        Variable::StateMass(s, j) => format!("{}@{}", scenario.label(s), j + 1),
        Variable::ResponseMass(p, o, j) => format!("{}({})@{}", scenario.label(p), scenario.label(o), j + 1),
    }
}

/// Builds the feasibility system of a scenario.
pub fn assemble(scenario: &Scenario) -> Result<Assembly> {
    scenario.validate()?;
    let atoms = enumerate_atoms(scenario, ORTH_EPS);
    let index = index_variables(scenario, &atoms, ORTH_EPS);
    let mut sys = ConstraintSystem::new();
    for v in index.entries() {
        sys.add_var(variable_label(scenario, v));
    }
    let var = |v: Variable| index.get(&v).expect("variable indexed");
    let opts = scenario.options;
    let w = opts.werner_w;

    for s in scenario.state_refs() {
        let coeffs = (0..atoms.len())
            .filter(|&j| has_state_mass(scenario, &atoms[j], s))
            .map(|j| (var(Variable::StateMass(s, j)), 1.0))
            .collect();
        sys.add_row(format!("norm[{}]", scenario.label(s)), coeffs, Relation::Eq, 1.0);
    }

    for (prep, outcome) in born_pairs(scenario, ORTH_EPS) {
        let mut coeffs = Vec::new();
        for (j, atom) in atoms.iter().enumerate() {
            if !has_state_mass(scenario, atom, prep) {
                continue;
            }
            match response_status(scenario, atom, prep, outcome, ORTH_EPS) {
                ResponseStatus::ForcedOne => coeffs.push((var(Variable::StateMass(prep, j)), 1.0)),
                ResponseStatus::Free if opts.deficiency => {
                    coeffs.push((var(Variable::ResponseMass(prep, outcome, j)), 1.0))
                }
                _ => {}
            }
        }
        let born = overlap(scenario.state(prep), scenario.state(outcome));
        let rhs = if opts.is_noisy() { w * born + (1.0 - w) / 2.0 } else { born };
        let label = format!("born[{}->{}]", scenario.label(prep), scenario.label(outcome));
        sys.add_row(label, coeffs, Relation::Eq, rhs);
    }

    match opts.mixture_mode {
        MixtureMode::Full => {
            for (e, ens) in scenario.ensembles().iter().enumerate() {
                for (j, atom) in atoms.iter().enumerate() {
                    let mut coeffs = vec![(var(Variable::BaseMass(j)), 1.0)];
                    for m in 0..ens.len() {
                        let s = StateRef::new(e, m);
                        if has_state_mass(scenario, atom, s) {
                            coeffs.push((var(Variable::StateMass(s, j)), -ens.weight(m)));
                        }
                    }
                    sys.add_row(format!("mix[E{}@{}]", e + 1, j + 1), coeffs, Relation::Eq, 0.0);
                }
            }
        }
        MixtureMode::SupportOnly => {
            let coeffs = (0..atoms.len()).map(|j| (var(Variable::BaseMass(j)), 1.0)).collect();
            sys.add_row(String::from("norm[nu]"), coeffs, Relation::Eq, 1.0);
        }
    }

    for v in index.entries() {
        if let Variable::ResponseMass(prep, _, j) = *v {
            let coeffs = vec![(var(*v), 1.0), (var(Variable::StateMass(prep, j)), -1.0)];
            sys.add_row(format!("resp[{}]", variable_label(scenario, v)), coeffs, Relation::Le, 0.0);
        }
    }

    Ok(Assembly { atoms, index, system: sys })
}

/// A low-dimensional system written over region marginals, with the map
/// from each marginal variable to the full-system variables it sums.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSystem {
    pub system: ConstraintSystem,
    pub projection: Vec<Vec<usize>>,
}

impl MarginalSystem {
    /// Sums a full-system point into marginal coordinates.
    pub fn project(&self, full: &[f64]) -> Vec<f64> {
        self.projection.iter().map(|ids| ids.iter().map(|&i| full[i]).sum()).collect()
    }
}

/// The hand-derivation system for a canned scenario: the `{x,X}`
/// subsystems over regions 1..6 for the non-orthogonal pair constructions,
/// the four-region z/Z system for three orthogonal ensembles (with ν pinned
/// by the x/y subsystem), and the full system for two orthogonal ensembles.
pub fn marginal_system(scenario: &Scenario) -> Result<MarginalSystem> {
    if scenario.options.is_noisy() {
        return Err(Error::UnsupportedScenario);
    }
    match scenario.origin() {
        Some(Origin::TwoOrthogonal { .. }) => {
            let full = assemble(scenario)?;
            let n = full.system.num_vars();
            Ok(MarginalSystem { system: full.system, projection: (0..n).map(|i| vec![i]).collect() })
        }
        Some(Origin::NonorthogonalPair { .. }) | Some(Origin::Gpr { .. }) => pair_marginal(scenario),
        Some(Origin::ThreeOrthogonal { triple }) => triple_marginal(scenario, triple),
        _ => Err(Error::UnsupportedScenario),
    }
}

fn pair_marginal(scenario: &Scenario) -> Result<MarginalSystem> {
    let full = assemble(scenario)?;
    let mut sys = ConstraintSystem::new();
    let mut projection = Vec::new();
    let a = StateRef::new(1, 0);
    let b = StateRef::new(1, 1);
    // Regions 1..3 lie in S_x, regions 4..6 in S_X.
    for (prep, regions) in [(StateRef::new(0, 0), 0..3usize), (StateRef::new(0, 1), 3..6usize)] {
        let name = scenario.label(prep);
        let ids: Vec<usize> = regions
            .clone()
            .map(|j| {
                let full_id = full.var(&Variable::StateMass(prep, j)).ok_or(Error::UnsupportedScenario)?;
                projection.push(vec![full_id]);
                Ok(sys.add_var(format!("{}@{}", name, j + 1)))
            })
            .collect::<Result<_>>()?;
        sys.add_row(format!("norm[{name}]"), ids.iter().map(|&i| (i, 1.0)).collect(), Relation::Eq, 1.0);
        // Outcome a holds on the first two regions of each half, b on the last two.
        let mut resp_rows = Vec::new();
        for (outcome, forced, free) in [(a, [0usize, 1], 2usize), (b, [1, 2], 0)] {
            let mut coeffs: Vec<(usize, f64)> = forced.iter().map(|&k| (ids[k], 1.0)).collect();
            if scenario.options.deficiency {
                let j = regions.start + free;
                let full_id = full
                    .var(&Variable::ResponseMass(prep, outcome, j))
                    .ok_or(Error::UnsupportedScenario)?;
                projection.push(vec![full_id]);
                let r = sys.add_var(format!("{}({})@{}", name, scenario.label(outcome), j + 1));
                coeffs.push((r, 1.0));
                resp_rows.push((r, ids[free], j));
            }
            let rhs = overlap(scenario.state(prep), scenario.state(outcome));
            sys.add_row(format!("born[{}->{}]", name, scenario.label(outcome)), coeffs, Relation::Eq, rhs);
        }
        for (r, base, _) in resp_rows {
            let label = format!("resp[{}]", sys.vars[r]);
            sys.add_row(label, vec![(r, 1.0), (base, -1.0)], Relation::Le, 0.0);
        }
    }
    Ok(MarginalSystem { system: sys, projection })
}

fn triple_marginal(scenario: &Scenario, t: OverlapTriple) -> Result<MarginalSystem> {
    let full = assemble(scenario)?;
    let mut sys = ConstraintSystem::new();
    let mut projection = Vec::new();
    // Region r ↔ (x-member, y-member): S1 = x∩y, S2 = x∩Y, S3 = X∩y, S4 = X∩Y.
    let regions = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let mut ids = [[0usize; 4]; 2];
    for m in 0..2 {
        let s = StateRef::new(2, m);
        for (r, &(xm, ym)) in regions.iter().enumerate() {
            let members: Vec<usize> = full
                .atoms
                .iter()
                .enumerate()
                .filter(|(_, atom)| atom.pattern()[0] == [xm] && atom.pattern()[1] == [ym] && atom.contains(s))
                .filter_map(|(j, _)| full.var(&Variable::StateMass(s, j)))
                .collect();
            projection.push(members);
            ids[m][r] = sys.add_var(format!("{}[{}]", scenario.label(s), r + 1));
        }
    }
    let (alpha, beta, gamma) = (t.alpha, t.beta, t.gamma);
    let (z, big_z) = (StateRef::new(2, 0), StateRef::new(2, 1));
    let lz = scenario.label(z);
    let lbz = scenario.label(big_z);
    let lx = scenario.label(StateRef::new(0, 0));
    let lbx = scenario.label(StateRef::new(0, 1));
    let ly = scenario.label(StateRef::new(1, 0));
    let lby = scenario.label(StateRef::new(1, 1));
    let rows: [(String, usize, [usize; 2], f64); 8] = [
        (format!("born[{lz}->{lx}]"), 0, [0, 1], beta),
        (format!("born[{lz}->{ly}]"), 0, [0, 2], gamma),
        (format!("born[{lz}->{lbx}]"), 0, [2, 3], 1.0 - beta),
        (format!("born[{lz}->{lby}]"), 0, [1, 3], 1.0 - gamma),
        (format!("born[{lbz}->{lbx}]"), 1, [2, 3], beta),
        (format!("born[{lbz}->{lby}]"), 1, [1, 3], gamma),
        (format!("born[{lbz}->{lx}]"), 1, [0, 1], 1.0 - beta),
        (format!("born[{lbz}->{ly}]"), 1, [0, 2], 1.0 - gamma),
    ];
    for (label, m, rs, rhs) in rows {
        sys.add_row(label, rs.iter().map(|&r| (ids[m][r], 1.0)).collect(), Relation::Eq, rhs);
    }
    // ν over the four regions, fixed by the x/y Born rows.
    let nu = [alpha / 2.0, (1.0 - alpha) / 2.0, (1.0 - alpha) / 2.0, alpha / 2.0];
    let (pz, pbz) = (scenario.weight(z), scenario.weight(big_z));
    for r in 0..4 {
        sys.add_row(
            format!("mix[E3@S{}]", r + 1),
            vec![(ids[0][r], pz), (ids[1][r], pbz)],
            Relation::Eq,
            nu[r],
        );
    }
    Ok(MarginalSystem { system: sys, projection })
}
