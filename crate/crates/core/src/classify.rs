//! Entanglement structures and state classification.
//!
//! A structure on `n` parties is a set of loops, each loop a subset of at
//! least two parties marked as mutually entangled. Structures are numbered
//! from 1 in a canonical order: by the number of loops of each size, largest
//! size first, then lexicographically by loop list with loops ordered by
//! size and then lexicographically. For three parties this gives
//!
//! ```text
//!  1       no loops                  9       {ABC}
//!  2..=4   one pair                  10..=12 {ABC} and one pair
//!  5..=7   two pairs                 13..=15 {ABC} and two pairs
//!  8       all three pairs           16      everything
//! ```
//!
//! Classes are orbits under party permutations, numbered by their smallest
//! member. Party indices are 0-based; labels use `A, B, C, ..`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{concurrence2q, negativity, three_tangle};
use crate::state::{DensityMatrix, PureState, State};

/// Detector scores above this mark a loop as present.
pub const DETECTOR_THRESHOLD: f64 = 1e-6;

/// Scores in `[BORDERLINE_FLOOR, DETECTOR_THRESHOLD]` raise a warning.
pub const BORDERLINE_FLOOR: f64 = 1e-9;

const MAX_ENUMERATED: usize = 4;
const MAX_COUNTED: usize = 5;

fn label(parties: &[usize]) -> String {
    parties.iter().map(|&p| char::from(b'A' + p as u8)).collect()
}

fn mask_parties(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

/// Subsets of `0..n` with at least two elements, by size then lexicographic.
fn loop_family(n: usize) -> Vec<u32> {
    let mut family: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() >= 2).collect();
    family.sort_by_key(|&m| (m.count_ones(), mask_parties(m)));
    family
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EntanglementStructure {
    n: usize,
    loops: Vec<Vec<usize>>,
}

impl EntanglementStructure {
    /// Validates and orders the loops; duplicates are rejected.
    pub fn new(n: usize, loops: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || n > 26 {
            return Err(Error::arg(format!("unsupported party count {n}")));
        }
        let mut normalized = Vec::with_capacity(loops.len());
        for mut l in loops {
            l.sort_unstable();
            l.dedup();
            if l.len() < 2 || l.iter().any(|&p| p >= n) {
                return Err(Error::arg(format!("loop {l:?} is not a subset of at least two of {n} parties")));
            }
            normalized.push(l);
        }
        normalized.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        if normalized.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("duplicate loop"));
        }
        Ok(Self { n, loops: normalized })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    pub fn contains(&self, parties: &[usize]) -> bool {
        let mut p = parties.to_vec();
        p.sort_unstable();
        self.loops.contains(&p)
    }

    /// Relabels party `p` as `perm[p]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let loops = self.loops.iter().map(|l| l.iter().map(|&p| perm[p]).collect()).collect();
        Self::new(self.n, loops)
    }

    /// `{AB,BC}` style label; `{}` for no loops.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.loops.iter().map(|l| label(l)).collect();
        format!("{{{}}}", parts.join(","))
    }

    fn mask(&self) -> u64 {
        let family = loop_family(self.n);
        self.loops
            .iter()
            .map(|l| {
                let m = l.iter().fold(0u32, |m, &p| m | 1 << p);
                1u64 << family.iter().position(|&f| f == m).expect("validated loop")
            })
            .sum()
    }
}

/// All structures on `n` parties in canonical order, with their
/// party-permutation classes.
#[derive(Clone, Debug)]
pub struct StructureCatalog {
    n: usize,
    structures: Vec<EntanglementStructure>,
    /// Structure id indexed by family bitmask.
    id_of_mask: Vec<usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for p in 0..used.len() {
            if !used[p] {
                used[p] = true;
                prefix.push(p);
                rec(prefix, used, out);
                prefix.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Image of each family element under each party permutation.
fn family_actions(n: usize, family: &[u32]) -> Vec<Vec<usize>> {
    permutations(n)
        .iter()
        .map(|perm| {
            family
                .iter()
                .map(|&m| {
                    let image = mask_parties(m).iter().fold(0u32, |acc, &p| acc | 1 << perm[p]);
                    family.iter().position(|&f| f == image).expect("permutations preserve size")
                })
                .collect()
        })
        .collect()
}

fn apply_action(action: &[usize], mask: u64) -> u64 {
    action.iter().enumerate().filter(|(f, _)| mask >> f & 1 == 1).map(|(_, &g)| 1u64 << g).sum()
}

impl StructureCatalog {
    fn build(n: usize) -> Self {
        let family = loop_family(n);
        let f = family.len();
        let sizes: Vec<usize> = family.iter().map(|m| m.count_ones() as usize).collect();
        let key = |mask: u64| {
            let mut counts = vec![0usize; n + 1];
            let members: Vec<usize> = (0..f).filter(|i| mask >> i & 1 == 1).collect();
            for &i in &members {
                counts[sizes[i]] += 1;
            }
            counts.reverse();
            (counts, members)
        };
        let mut masks: Vec<u64> = (0..1u64 << f).collect();
        masks.sort_by_cached_key(|&m| key(m));

        let mut id_of_mask = vec![0; 1 << f];
        for (i, &m) in masks.iter().enumerate() {
            id_of_mask[m as usize] = i + 1;
        }
        let actions = family_actions(n, &family);
        let mut class_of = vec![0; masks.len()];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for (i, &m) in masks.iter().enumerate() {
            if class_of[i] != 0 {
                continue;
            }
            let mut members: Vec<usize> = actions.iter().map(|a| id_of_mask[apply_action(a, m) as usize]).collect();
            members.sort_unstable();
            members.dedup();
            classes.push(members.clone());
            for id in members {
                class_of[id - 1] = classes.len();
            }
        }
        let structures = masks
            .iter()
            .map(|&m| {
                let loops = (0..f).filter(|i| m >> i & 1 == 1).map(|i| mask_parties(family[i])).collect();
                EntanglementStructure { n, loops }
            })
            .collect();
        Self { n, structures, id_of_mask, class_of, classes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    pub fn structures(&self) -> &[EntanglementStructure] {
        &self.structures
    }

    /// Structure with 1-based id `id`.
    pub fn structure(&self, id: usize) -> Option<&EntanglementStructure> {
        id.checked_sub(1).and_then(|i| self.structures.get(i))
    }

    pub fn system_id(&self, s: &EntanglementStructure) -> Option<usize> {
        (s.n == self.n).then(|| self.id_of_mask[s.mask() as usize])
    }

    /// 1-based class id of a structure id.
    pub fn class_id(&self, system_id: usize) -> Option<usize> {
        system_id.checked_sub(1).and_then(|i| self.class_of.get(i)).copied()
    }

    /// Member ids of each class, classes in id order.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }
}

/// Catalog for `2 <= n <= 4`, built once per process.
pub fn enumerate_structures(n: usize) -> Result<&'static StructureCatalog> {
    static CATALOGS: [OnceLock<StructureCatalog>; MAX_ENUMERATED + 1] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if n == MAX_COUNTED {
        let c = structure_counts(n)?;
        return Err(Error::arg(format!(
            "{n} parties have {} structures in {} classes, too many to list; only counts are available",
            c.structures, c.classes
        )));
    }
    if !(2..=MAX_ENUMERATED).contains(&n) {
        return Err(Error::arg(format!("structure enumeration supports 2 to {MAX_COUNTED} parties, got {n}")));
    }
    Ok(CATALOGS[n].get_or_init(|| StructureCatalog::build(n)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructureCounts {
    pub structures: u64,
    pub classes: u64,
}

/// Structure and class counts for `2 <= n <= 5`. Classes are counted with
/// Burnside's lemma, so nothing is enumerated.
pub fn structure_counts(n: usize) -> Result<StructureCounts> {
    if !(2..=MAX_COUNTED).contains(&n) {
        return Err(Error::arg(format!("structure counting supports 2 to {MAX_COUNTED} parties, got {n}")));
    }
    let family = loop_family(n);
    let actions = family_actions(n, &family);
    let mut fixed = 0u64;
    for action in &actions {
        let mut seen = vec![false; family.len()];
        let mut cycles = 0;
        for start in 0..family.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = action[i];
            }
        }
        fixed += 1u64 << cycles;
    }
    Ok(StructureCounts { structures: 1u64 << family.len(), classes: fixed / actions.len() as u64 })
}

/// The 2-mixed five-party example: a local operation leaves `ABC` in a
/// pure tripartite entanglement, another leaves `ABCD` in a pure
/// four-party entanglement.
pub fn two_mixed_five_party() -> EntanglementStructure {
    EntanglementStructure::new(5, vec![vec![0, 1, 2], vec![0, 1, 2, 3]]).expect("valid loops")
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureReport {
    #[serde(flatten)]
    pub structure: EntanglementStructure,
    pub system_id: Option<usize>,
    pub class_id: Option<usize>,
    pub class_members: Vec<usize>,
    pub detectors: BTreeMap<String, f64>,
    /// True only for the exact three-qubit pure-state rules.
    pub exact: bool,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Detections {
    loops: Vec<Vec<usize>>,
    detectors: BTreeMap<String, f64>,
    warnings: Vec<String>,
}

impl Detections {
    fn score(&mut self, name: String, value: f64) -> bool {
        if (BORDERLINE_FLOOR..=DETECTOR_THRESHOLD).contains(&value) {
            self.warnings.push(format!("{name} = {value:e} is within the borderline band"));
        }
        self.detectors.insert(name, value);
        value > DETECTOR_THRESHOLD
    }

    fn report(self, n: usize, exact: bool) -> Result<StructureReport> {
        let structure = EntanglementStructure::new(n, self.loops)?;
        let catalog = enumerate_structures(n).ok();
        let system_id = catalog.and_then(|c| c.system_id(&structure));
        let class_id = system_id.and_then(|id| catalog.and_then(|c| c.class_id(id)));
        let class_members = match (catalog, class_id) {
            (Some(c), Some(k)) => c.classes()[k - 1].clone(),
            _ => Vec::new(),
        };
        Ok(StructureReport {
            structure,
            system_id,
            class_id,
            class_members,
            detectors: self.detectors,
            exact,
            warnings: self.warnings,
        })
    }
}

/// Exact structure of a three-qubit pure state.
///
/// A pair loop is present when the pair's concurrence exceeds the detector
/// threshold. The triple loop is present when every single-party marginal
/// is mixed (`4 det ρ_X` above threshold) and the three-tangle is positive,
/// which separates GHZ-type states from W-type ones.
pub fn classify3q(psi: &PureState) -> Result<StructureReport> {
    if psi.system().dims() != [2, 2, 2] {
        return Err(Error::arg(format!("exact classification needs three qubits, got {}", psi.system())));
    }
    psi.ensure_valid()?;
    let rho = psi.to_density();
    let mut d = Detections::default();
    for pair in [[0, 1], [0, 2], [1, 2]] {
        let c = concurrence2q(&rho.partial_trace(&pair)?)?;
        if d.score(format!("concurrence:{}", label(&pair)), c) {
            d.loops.push(pair.to_vec());
        }
    }
    let mut all_mixed = true;
    for x in 0..3 {
        let m = rho.partial_trace(&[x])?.matrix().clone();
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let rest: Vec<usize> = (0..3).filter(|&p| p != x).collect();
        all_mixed &= d.score(format!("bipartition:{}|{}", label(&[x]), label(&rest)), 4.0 * det.max(0.0));
    }
    let tangle = three_tangle(psi)?;
    if d.score("tangle:ABC".to_string(), tangle) && all_mixed {
        d.loops.push(vec![0, 1, 2]);
    }
    d.report(3, true)
}

/// Bipartitions `(T, S \ T)` of `subset`, each listed once (`T` holds the
/// first element), with `T` given as positions within `subset`.
fn bipartitions(k: usize) -> Vec<Vec<usize>> {
    (1u32..1 << (k - 1)).rev().map(|m| (0..k).filter(|&i| i == 0 || (m >> (i - 1) & 1 == 0)).collect()).collect()
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    loop_family(n).into_iter().map(mask_parties).collect()
}

/// Smallest negativity over all bipartitions of the reduction to `subset`.
fn subset_score(rho: &DensityMatrix, subset: &[usize], d: &mut Detections) -> Result<f64> {
    let reduced = if subset.len() == rho.system().parties() { rho.clone() } else { rho.partial_trace(subset)? };
    let mut worst = f64::INFINITY;
    for side in bipartitions(subset.len()) {
        let a: Vec<usize> = side.iter().map(|&i| subset[i]).collect();
        let b: Vec<usize> = subset.iter().filter(|p| !a.contains(p)).copied().collect();
        let value = negativity(&reduced, &side)?;
        d.score(format!("negativity:{}|{}", label(&a), label(&b)), value);
        worst = worst.min(value);
    }
    Ok(worst)
}

fn check_report_size(rho: &DensityMatrix) -> Result<()> {
    let dims = rho.system().dims();
    if dims.len() > 4 || dims.iter().any(|&d| d > 3) {
        return Err(Error::arg(format!("structure reports support up to 4 parties of dimension <= 3, got {}", rho.system())));
    }
    Ok(())
}

/// Structure report for any state of up to four parties.
///
/// Three-qubit pure states get the exact rules of [`classify3q`]. Otherwise
/// a loop on `S` is reported when the reduction to `S` has positive
/// negativity across every bipartition of `S`. Positive partial transposes
/// do not prove separability beyond `2x3`, so such reports are not exact.
pub fn structure_report(state: &State) -> Result<StructureReport> {
    if let State::Pure(psi) = state {
        if psi.system().dims() == [2, 2, 2] {
            return classify3q(psi);
        }
    }
    let rho = state.to_density();
    check_report_size(&rho)?;
    rho.ensure_valid()?;
    let n = rho.system().parties();
    let mut d = Detections::default();
    for subset in subsets(n) {
        let score = subset_score(&rho, &subset, &mut d)?;
        if score > DETECTOR_THRESHOLD {
            d.loops.push(subset);
        }
    }
    d.report(n, false)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetVerdict {
    pub parties: Vec<usize>,
    /// Smallest negativity over the bipartitions of the subset.
    pub score: f64,
    pub entangled: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FullEntanglement {
    pub fully_entangled: bool,
    pub subsets: Vec<SubsetVerdict>,
}

/// Whether every subset of at least two parties is entangled across all
/// of its bipartitions, for pure qubit states of up to four parties.
pub fn is_fully_entangled(psi: &PureState) -> Result<FullEntanglement> {
    let n = psi.system().parties();
    if !psi.system().is_qubits() || !(2..=4).contains(&n) {
        return Err(Error::arg(format!("full entanglement check supports 2 to 4 qubits, got {}", psi.system())));
    }
    psi.ensure_valid()?;
    let rho = psi.to_density();
    let mut d = Detections::default();
    let mut verdicts = Vec::new();
    for subset in subsets(n) {
        let score = subset_score(&rho, &subset, &mut d)?;
        verdicts.push(SubsetVerdict { parties: subset, score, entangled: score > DETECTOR_THRESHOLD });
    }
    Ok(FullEntanglement { fully_entangled: verdicts.iter().all(|v| v.entangled), subsets: verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::state::random_pure;
    use crate::state::PartySystem;

    #[test]
    fn three_party_catalog() {
        let c = enumerate_structures(3).unwrap();
        assert_eq!(c.len(), 16);
        let classes: Vec<Vec<usize>> = c.classes().to_vec();
        let expected = vec![
            vec![1],
            vec![2, 3, 4],
            vec![5, 6, 7],
            vec![8],
            vec![9],
            vec![10, 11, 12],
            vec![13, 14, 15],
            vec![16],
        ];
        assert_eq!(classes, expected);
        assert_eq!(c.structure(1).unwrap().label(), "{}");
        assert_eq!(c.structure(4).unwrap().label(), "{BC}");
        assert_eq!(c.structure(8).unwrap().label(), "{AB,AC,BC}");
        assert_eq!(c.structure(9).unwrap().label(), "{ABC}");
        assert_eq!(c.structure(16).unwrap().label(), "{AB,AC,BC,ABC}");
    }

    #[test]
    fn two_party_catalog() {
        let c = enumerate_structures(2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.classes().len(), 2);
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for n in 2..=4 {
            let c = enumerate_structures(n).unwrap();
            let k = structure_counts(n).unwrap();
            assert_eq!(k.structures as usize, c.len());
            assert_eq!(k.classes as usize, c.classes().len());
            assert_eq!(c.classes().iter().map(Vec::len).sum::<usize>(), c.len());
        }
        assert_eq!(structure_counts(4).unwrap().structures, 2048);
        assert_eq!(structure_counts(5).unwrap().structures, 1 << 26);
        assert!(enumerate_structures(5).is_err());
        assert!(enumerate_structures(1).is_err());
        assert!(structure_counts(6).is_err());
    }

    #[test]
    fn ids_round_trip() {
        let c = enumerate_structures(4).unwrap();
        for (i, s) in c.structures().iter().enumerate() {
            assert_eq!(c.system_id(s), Some(i + 1));
        }
    }

    #[test]
    fn structure_validation() {
        assert!(EntanglementStructure::new(3, vec![vec![0]]).is_err());
        assert!(EntanglementStructure::new(3, vec![vec![0, 3]]).is_err());
        assert!(EntanglementStructure::new(3, vec![vec![0, 1], vec![1, 0]]).is_err());
        let s = EntanglementStructure::new(3, vec![vec![2, 1, 0], vec![2, 1]]).unwrap();
        assert_eq!(s.loops(), &[vec![1, 2], vec![0, 1, 2]]);
        let f = two_mixed_five_party();
        assert!(f.contains(&[0, 1, 2]) && f.contains(&[3, 2, 1, 0]));
        assert_eq!(f.label(), "{ABC,ABCD}");
    }

    #[test]
    fn exact_fixtures() {
        let cases = [(fixtures::ghz(3), 9, 5), (fixtures::w(3), 8, 4), (fixtures::pair_bc(), 4, 2), (fixtures::zeros(3), 1, 1)];
        for (psi, id, class) in cases {
            let r = classify3q(&psi).unwrap();
            assert_eq!(r.system_id, Some(id), "{r:?}");
            assert_eq!(r.class_id, Some(class));
            assert!(r.exact);
            assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        }
    }

    #[test]
    fn heuristic_reports() {
        let sep = structure_report(&State::Density(fixtures::separable_mixed())).unwrap();
        assert!(sep.structure.loops().is_empty());
        assert!(!sep.exact);
        let bell0 = fixtures::bell().tensor(&fixtures::zeros(1), 64).unwrap();
        let r = structure_report(&State::Density(bell0.to_density())).unwrap();
        assert_eq!(r.structure.loops(), &[vec![0, 1]]);
        let r = structure_report(&State::Density(fixtures::ghz(3).to_density())).unwrap();
        assert_eq!(r.structure.loops(), &[vec![0, 1, 2]]);
        assert_eq!(r.system_id, Some(9));
        assert!(!r.exact);
        let r = structure_report(&State::Pure(fixtures::w(3))).unwrap();
        assert!(r.exact);
        let too_big = DensityMatrix::maximally_mixed(PartySystem::new(vec![4, 2]).unwrap());
        assert!(structure_report(&State::Density(too_big)).is_err());
    }

    #[test]
    fn full_entanglement_examples() {
        assert!(!is_fully_entangled(&fixtures::zeros(3)).unwrap().fully_entangled);
        let ghz = is_fully_entangled(&fixtures::ghz(3)).unwrap();
        assert!(!ghz.fully_entangled);
        assert!(ghz.subsets.iter().filter(|v| v.parties.len() == 2).all(|v| !v.entangled && v.score < 1e-9));
        let w = is_fully_entangled(&fixtures::w(3)).unwrap();
        assert!(w.fully_entangled);
        assert_eq!(w.subsets.len(), 4);
        assert!(is_fully_entangled(&random_pure(&PartySystem::new(vec![3, 2]).unwrap(), 0)).is_err());
    }

    #[test]
    fn bipartition_listing() {
        assert_eq!(bipartitions(2), vec![vec![0]]);
        assert_eq!(bipartitions(3), vec![vec![0], vec![0, 1], vec![0, 2]]);
        assert_eq!(bipartitions(4).len(), 7);
    }
}
