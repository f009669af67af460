//! Combinatorial skeleton of an incomplete model: the disjoint support
//! regions ("atoms") generated by the ensembles, and the variable index of
//! the feasibility system built over them.
//!
//! An atom is described by, for every ensemble, the set of its members whose
//! support contains the atom. Members whose states are orthogonal can never
//! share an atom, so an orthogonal-basis ensemble always contributes a single
//! member.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::assembly::{ConstraintSet, Scenario};
use crate::qubit::overlap;

/// Default numeric orthogonality threshold on |⟨φ|ψ⟩|².
pub const ORTH_EPS: f64 = 1e-9;

/// One member of one ensemble of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateRef {
    pub ensemble: usize,
    pub member: usize,
}

impl StateRef {
    pub fn new(ensemble: usize, member: usize) -> Self {
        Self { ensemble, member }
    }
}

/// A region of real-state space: per ensemble, the members supported there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupportAtom {
    pattern: Vec<Vec<usize>>,
}

impl SupportAtom {
    pub fn new(pattern: Vec<Vec<usize>>) -> Self {
        Self { pattern }
    }

    pub fn pattern(&self) -> &[Vec<usize>] {
        &self.pattern
    }

    pub fn contains(&self, s: StateRef) -> bool {
        self.pattern.get(s.ensemble).is_some_and(|members| members.contains(&s.member))
    }

    pub fn states(&self) -> impl Iterator<Item = StateRef> + '_ {
        self.pattern
            .iter()
            .enumerate()
            .flat_map(|(e, ms)| ms.iter().map(move |&m| StateRef::new(e, m)))
    }
}

fn orthogonal(scenario: &Scenario, a: StateRef, b: StateRef, orth_eps: f64) -> bool {
    overlap(scenario.state(a), scenario.state(b)) < orth_eps
}

/// Nonempty member subsets of one ensemble with no orthogonal pair,
/// in lexicographic order of their sorted index lists.
fn admissible_subsets(scenario: &Scenario, ensemble: usize, orth_eps: f64) -> Vec<Vec<usize>> {
    let n = scenario.ensembles()[ensemble].len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for mask in 1u64..(1u64 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let ok = members.iter().enumerate().all(|(k, &i)| {
            members[k + 1..].iter().all(|&j| {
                !orthogonal(scenario, StateRef::new(ensemble, i), StateRef::new(ensemble, j), orth_eps)
            })
        });
        if ok {
            out.push(members);
        }
    }
    out.sort();
    out
}

/// All atoms of the scenario in canonical (lexicographic) order.
pub fn enumerate_atoms(scenario: &Scenario, orth_eps: f64) -> Vec<SupportAtom> {
    let choices: Vec<Vec<Vec<usize>>> = (0..scenario.ensembles().len())
        .map(|e| admissible_subsets(scenario, e, orth_eps))
        .collect();
    let mut atoms = Vec::new();
    let mut current: Vec<Vec<usize>> = Vec::with_capacity(choices.len());
    extend(scenario, orth_eps, &choices, &mut current, &mut atoms);
    atoms
}

fn extend(
    scenario: &Scenario,
    orth_eps: f64,
    choices: &[Vec<Vec<usize>>],
    current: &mut Vec<Vec<usize>>,
    out: &mut Vec<SupportAtom>,
) {
    let e = current.len();
    if e == choices.len() {
        out.push(SupportAtom::new(current.clone()));
        return;
    }
    for subset in &choices[e] {
        let clash = subset.iter().any(|&m| {
            current.iter().enumerate().any(|(f, prev)| {
                prev.iter()
                    .any(|&k| orthogonal(scenario, StateRef::new(e, m), StateRef::new(f, k), orth_eps))
            })
        });
        if clash {
            continue;
        }
        current.push(subset.clone());
        extend(scenario, orth_eps, choices, current, out);
        current.pop();
    }
}

/// Value of the response function ξ_outcome on an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseStatus {
    /// The atom lies in the support of the outcome state itself.
    ForcedOne,
    /// The atom lies in the support of a state orthogonal to the outcome.
    ForcedZero,
    Free,
}

/// Status of outcome `outcome` on `atom`. The preparation does not affect
/// the value; it is part of the signature because response masses are
/// indexed by (preparation, outcome, atom).
pub fn response_status(
    scenario: &Scenario,
    atom: &SupportAtom,
    _prep: StateRef,
    outcome: StateRef,
    orth_eps: f64,
) -> ResponseStatus {
    if atom.contains(outcome) {
        return ResponseStatus::ForcedOne;
    }
    if atom.states().any(|s| orthogonal(scenario, s, outcome, orth_eps)) {
        return ResponseStatus::ForcedZero;
    }
    ResponseStatus::Free
}

/// (preparation, outcome) pairs that receive a Born row.
///
/// `PaperStrict`: every cross-ensemble pair, except that for an
/// orthogonal-basis outcome ensemble the last member (whose row follows from
/// normalization) is skipped. `AllPairs`: every ordered pair of distinct
/// states except same-ensemble orthogonal pairs of the pure model.
/// Noisy scenarios (w < 1) also get the self pair (μ, μ), which replaces the
/// structural rule that a preparation lives only on its own support.
pub fn born_pairs(scenario: &Scenario, orth_eps: f64) -> Vec<(StateRef, StateRef)> {
    let ens = scenario.ensembles();
    let noisy = scenario.options.is_noisy();
    let basis: Vec<bool> = ens.iter().map(|e| e.is_orthogonal_basis(orth_eps)).collect();
    let mut pairs = Vec::new();
    for (pe, pens) in ens.iter().enumerate() {
        for pm in 0..pens.len() {
            let prep = StateRef::new(pe, pm);
            for (oe, oens) in ens.iter().enumerate() {
                for om in 0..oens.len() {
                    let outcome = StateRef::new(oe, om);
                    let keep = if prep == outcome {
                        noisy
                    } else if oe == pe {
                        match scenario.options.constraint_set {
                            ConstraintSet::PaperStrict => false,
                            ConstraintSet::AllPairs => {
                                noisy || !orthogonal(scenario, prep, outcome, orth_eps)
                            }
                        }
                    } else {
                        match scenario.options.constraint_set {
                            ConstraintSet::PaperStrict => !(basis[oe] && om + 1 == oens.len() && oens.len() > 1),
                            ConstraintSet::AllPairs => true,
                        }
                    };
                    if keep {
                        pairs.push((prep, outcome));
                    }
                }
            }
        }
    }
    pairs
}

/// One LP variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    /// ν restricted to an atom.
    BaseMass(usize),
    /// A preparation's mass on an atom.
    StateMass(StateRef, usize),
    /// ξ_outcome-weighted mass of a preparation on an atom.
    ResponseMass(StateRef, StateRef, usize),
}

/// Ordered variable list with reverse lookup.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariableIndex {
    entries: Vec<Variable>,
    lookup: BTreeMap<Variable, usize>,
}

impl VariableIndex {
    fn push(&mut self, v: Variable) {
        self.lookup.insert(v, self.entries.len());
        self.entries.push(v);
    }

    pub fn entries(&self) -> &[Variable] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: &Variable) -> Option<usize> {
        self.lookup.get(v).copied()
    }
}

/// Whether a preparation carries mass on an atom. In the pure model a state
/// lives only on atoms inside its own support; noisy preparations are
/// full-rank and may occupy every atom.
pub fn has_state_mass(scenario: &Scenario, atom: &SupportAtom, s: StateRef) -> bool {
    scenario.options.is_noisy() || atom.contains(s)
}

/// Base masses, then state masses grouped by state, then response masses
/// grouped by (preparation, outcome) in Born-pair order.
pub fn index_variables(scenario: &Scenario, atoms: &[SupportAtom], orth_eps: f64) -> VariableIndex {
    let mut index = VariableIndex::default();
    for j in 0..atoms.len() {
        index.push(Variable::BaseMass(j));
    }
    for s in scenario.state_refs() {
        for (j, atom) in atoms.iter().enumerate() {
            if has_state_mass(scenario, atom, s) {
                index.push(Variable::StateMass(s, j));
            }
        }
    }
    if scenario.options.deficiency {
        for (prep, outcome) in born_pairs(scenario, orth_eps) {
            for (j, atom) in atoms.iter().enumerate() {
                if has_state_mass(scenario, atom, prep)
                    && response_status(scenario, atom, prep, outcome, orth_eps) == ResponseStatus::Free
                {
                    index.push(Variable::ResponseMass(prep, outcome, j));
                }
            }
        }
    }
    index
}

/// Member patterns of all atoms, for reports.
pub fn atom_table(atoms: &[SupportAtom]) -> Vec<Vec<Vec<usize>>> {
    atoms.iter().map(|a| a.pattern().to_vec()).collect()
}
