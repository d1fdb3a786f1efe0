//! Ambiguous classes: partitions of an allowed-error set by syndrome,
//! the identity-syndrome group and its cosets, Hamming-bound checks, and
//! syndrome coarse-graining.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::stabilizer::{format_logical, StabilizerCode, Syndrome};

/// Allowed set of Pauli errors, stored as phase-0 representatives.
#[derive(Clone, Debug)]
pub struct ErrorSet {
    n: usize,
    elements: Vec<PauliOperator>,
}

impl ErrorSet {
    pub fn new(n: usize, elements: Vec<PauliOperator>) -> Result<Self> {
        let mut reps: Vec<PauliOperator> = elements.iter().map(|e| e.phase0()).collect();
        for e in &reps {
            if e.n() != n {
                return Err(Error::DimensionMismatch {
                    left: e.n(),
                    right: n,
                });
            }
        }
        let before = reps.len();
        reps.sort_by_key(element_key);
        reps.dedup();
        if reps.len() != before {
            return Err(Error::MalformedInput {
                what: "error set".into(),
                reason: "duplicate elements".into(),
            });
        }
        Ok(Self { n, elements: reps })
    }

    /// The full m-coordinate Pauli group embedded on the given coordinates
    /// (0-based), identity elsewhere: 4^m elements.
    pub fn pauli_group_on(n: usize, coords: &[usize]) -> Result<Self> {
        let mut elements = Vec::with_capacity(1 << (2 * coords.len()));
        for p in PauliOperator::all_phase0(coords.len()) {
            elements.push(p.embed(n, coords)?);
        }
        Self::new(n, elements)
    }

    /// All phase-0 errors of weight at most `w`.
    pub fn weight_at_most(n: usize, w: usize) -> Result<Self> {
        let elements = PauliOperator::all_phase0(n)
            .filter(|p| p.weight() <= w)
            .collect();
        Self::new(n, elements)
    }

    /// Identity plus the 3n single-qubit errors.
    pub fn single_qubit_with_identity(n: usize) -> Result<Self> {
        Self::weight_at_most(n, 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PauliOperator] {
        &self.elements
    }
}

/// Canonical ordering for displayed errors: weight first, then letters.
fn element_key(e: &PauliOperator) -> (usize, String) {
    (e.weight(), e.to_string())
}

/// Partition of an allowed-error set into syndrome-labelled ambiguous sets.
#[derive(Debug, Clone)]
pub struct AmbiguousClass {
    code: StabilizerCode,
    sets: Vec<(Syndrome, Vec<PauliOperator>)>,
    order_sigma: usize,
    degree_gamma: usize,
}

impl AmbiguousClass {
    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    /// Nonempty ambiguous sets in syndrome order (trivial syndrome first).
    pub fn sets(&self) -> &[(Syndrome, Vec<PauliOperator>)] {
        &self.sets
    }

    /// Number of nonempty ambiguous sets.
    pub fn order_sigma(&self) -> usize {
        self.order_sigma
    }

    /// Size of the largest ambiguous set.
    pub fn degree_gamma(&self) -> usize {
        self.degree_gamma
    }

    pub fn element_count(&self) -> usize {
        self.sets.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn set_for(&self, syndrome: &Syndrome) -> Option<&[PauliOperator]> {
        self.sets
            .iter()
            .find(|(s, _)| s == syndrome)
            .map(|(_, v)| v.as_slice())
    }

    /// Syndrome of the set containing the given error, if any.
    pub fn syndrome_of_element(&self, error: &PauliOperator) -> Option<&Syndrome> {
        let rep = error.phase0();
        self.sets
            .iter()
            .find(|(_, v)| v.contains(&rep))
            .map(|(s, _)| s)
    }
}

/// Partitions the allowed errors by syndrome.
pub fn build_class(code: &StabilizerCode, errors: &ErrorSet) -> Result<AmbiguousClass> {
    if errors.n() != code.n() {
        return Err(Error::DimensionMismatch {
            left: errors.n(),
            right: code.n(),
        });
    }
    let mut map: BTreeMap<Syndrome, Vec<PauliOperator>> = BTreeMap::new();
    for e in errors.elements() {
        let s = code.syndrome_of(e)?;
        map.entry(s).or_default().push(*e);
    }
    let mut sets: Vec<(Syndrome, Vec<PauliOperator>)> = map.into_iter().collect();
    for (_, v) in &mut sets {
        v.sort_by_key(element_key);
    }
    let order_sigma = sets.len();
    let degree_gamma = sets.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    Ok(AmbiguousClass {
        code: code.clone(),
        sets,
        order_sigma,
        degree_gamma,
    })
}

/// The normalizer element connecting two ambiguous errors.
#[derive(Clone, Debug)]
pub struct AmbiguityNormalizer {
    /// Full product e1·e2 including the accumulated phase.
    pub product: PauliOperator,
    /// Phase-0 letters of the product; the class representative reported in
    /// the tables.
    pub representative: PauliOperator,
    /// Logical action of the representative.
    pub logical: PauliOperator,
    /// Phase exponent of the representative's action: i^q.
    pub phase_exp: u8,
}

impl AmbiguityNormalizer {
    /// Signed class label such as "-X_L".
    pub fn label(&self) -> String {
        format_logical(&self.logical, self.phase_exp)
    }
}

/// For e1, e2 sharing a syndrome, returns N = e1·e2 with the logical action
/// of its phase-0 representative. The reversed product is checked to be the
/// Hermitian conjugate.
pub fn ambiguity_normalizer(
    code: &StabilizerCode,
    e1: &PauliOperator,
    e2: &PauliOperator,
) -> Result<AmbiguityNormalizer> {
    if code.syndrome_of(e1)? != code.syndrome_of(e2)? {
        return Err(Error::NotAmbiguous {
            left: e1.to_string(),
            right: e2.to_string(),
        });
    }
    let product = e1.multiply(e2)?;
    let reversed = e2.multiply(e1)?;
    // N' = N† holds identically for Hermitian e1, e2
    debug_assert_eq!(reversed, product.adjoint());
    let _ = reversed;
    let representative = product.phase0();
    let (logical, phase_exp) = code.logical_action(&representative)?;
    Ok(AmbiguityNormalizer {
        product,
        representative,
        logical,
        phase_exp,
    })
}

/// Extracts the identity-syndrome error set over the designated coordinates
/// and checks the subgroup laws: identity membership, closure under
/// multiplication mod phase, and self-inverse elements.
pub fn verify_ambiguous_group(
    code: &StabilizerCode,
    coords: &[usize],
) -> Result<(Vec<PauliOperator>, bool)> {
    let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
    let class = build_class(code, &errors)?;
    let trivial = Syndrome::new(&vec![1; code.n() - code.k()])?;
    let group: Vec<PauliOperator> = class
        .set_for(&trivial)
        .map(|v| v.to_vec())
        .unwrap_or_default();
    let identity = PauliOperator::identity(code.n())?;
    let mut ok = group.contains(&identity);
    for a in &group {
        for b in &group {
            let prod = a.multiply(b)?.phase0();
            if !group.contains(&prod) {
                ok = false;
            }
        }
        // self-inverse mod phase: a·a = ±I always, so inverses stay inside
        if !group.contains(&a.multiply(a)?.phase0()) {
            ok = false;
        }
    }
    Ok((group, ok))
}

/// The ambiguous sets as cosets of the identity-syndrome group: every set
/// must equal {phase0(E·B)} for each of its representatives E, the cosets
/// must be equal-sized, and together they must partition the error group.
pub fn quotient_structure(
    code: &StabilizerCode,
    coords: &[usize],
) -> Result<Vec<Vec<PauliOperator>>> {
    let (group, ok) = verify_ambiguous_group(code, coords)?;
    if !ok {
        return Err(Error::InvalidCode {
            reason: "identity-syndrome set is not a subgroup".into(),
        });
    }
    let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
    let class = build_class(code, &errors)?;
    let mut total = 0;
    for (_, set) in class.sets() {
        if set.len() != group.len() {
            return Err(Error::InvalidCode {
                reason: format!(
                    "set of size {} is not a coset of the size-{} group",
                    set.len(),
                    group.len()
                ),
            });
        }
        for rep in set {
            let mut coset: Vec<PauliOperator> =
                group.iter().map(|b| rep.multiply(b).unwrap().phase0()).collect();
            coset.sort_by_key(element_key);
            if coset != *set {
                return Err(Error::InvalidCode {
                    reason: format!("set containing {rep} is not the coset {rep}·B"),
                });
            }
        }
        total += set.len();
    }
    if total != errors.len() {
        return Err(Error::InvalidCode {
            reason: "cosets do not cover the error group".into(),
        });
    }
    Ok(class.sets().iter().map(|(_, v)| v.clone()).collect())
}

/// Quantum Hamming bound: 2^k · error_count ≤ 2^n; perfect iff equality.
pub fn hamming_check(n: usize, k: usize, error_count: usize) -> (bool, bool) {
    let lhs = (1u128 << k) * error_count as u128;
    let rhs = 1u128 << n;
    (lhs <= rhs, lhs == rhs)
}

/// Degree of ambiguity forced by counting: 2^{2m−n+k} for full m-coordinate
/// error groups.
pub fn degree_formula_check(n: usize, k: usize, m: usize) -> Result<usize> {
    if 2 * m + k < n {
        // 2m < n − k: fewer errors than syndromes, formula does not apply
        return Err(Error::MalformedInput {
            what: "degree formula".into(),
            reason: format!("2m = {} is smaller than n-k = {}", 2 * m, n - k),
        });
    }
    Ok(1usize << (2 * m + k - n))
}

/// Merges ambiguous sets by dropping the listed generator positions from
/// every syndrome.
pub fn coarse_grain(class: &AmbiguousClass, dropped: &[usize]) -> Result<AmbiguousClass> {
    let r = class
        .sets()
        .first()
        .map(|(s, _)| s.len())
        .unwrap_or(class.code().n() - class.code().k());
    for &i in dropped {
        if i >= r {
            return Err(Error::MalformedInput {
                what: "coarse graining".into(),
                reason: format!("generator index {i} out of range for {r} signs"),
            });
        }
    }
    let mut map: BTreeMap<Syndrome, Vec<PauliOperator>> = BTreeMap::new();
    for (s, v) in class.sets() {
        map.entry(s.drop_positions(dropped))
            .or_default()
            .extend(v.iter().copied());
    }
    let mut sets: Vec<(Syndrome, Vec<PauliOperator>)> = map.into_iter().collect();
    for (_, v) in &mut sets {
        v.sort_by_key(element_key);
        v.dedup();
    }
    let order_sigma = sets.len();
    let degree_gamma = sets.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    Ok(AmbiguousClass {
        code: class.code().clone(),
        sets,
        order_sigma,
        degree_gamma,
    })
}

/// Plain class table: one column per syndrome, header row of signs, rows of
/// error strings in canonical order. Ragged sets are padded with blanks.
pub fn render_class_table(class: &AmbiguousClass) -> String {
    let headers: Vec<String> = class.sets().iter().map(|(s, _)| s.to_string()).collect();
    let rows = class.degree_gamma();
    let mut grid: Vec<Vec<String>> = vec![headers];
    for r in 0..rows {
        grid.push(
            class
                .sets()
                .iter()
                .map(|(_, v)| v.get(r).map(|e| e.to_string()).unwrap_or_default())
                .collect(),
        );
    }
    layout(&grid)
}

/// Coset-aligned class table with a trailing normalizer column: row r of
/// column c is rep_c · b_r and the last column is the logical action of
/// b_r.
pub fn render_quotient_table(code: &StabilizerCode, coords: &[usize]) -> Result<String> {
    let cosets = quotient_structure(code, coords)?;
    let errors = ErrorSet::pauli_group_on(code.n(), coords)?;
    let class = build_class(code, &errors)?;
    let group = cosets
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidCode {
            reason: "empty quotient".into(),
        })?;
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut header: Vec<String> = class.sets().iter().map(|(s, _)| s.to_string()).collect();
    header.push("N".into());
    grid.push(header);
    let reps: Vec<PauliOperator> = class.sets().iter().map(|(_, v)| v[0]).collect();
    for b in &group {
        let mut row: Vec<String> = reps
            .iter()
            .map(|rep| rep.multiply(b).unwrap().phase0().to_string())
            .collect();
        let (logical, q) = code.logical_action(b)?;
        row.push(format_logical(&logical, q));
        grid.push(row);
    }
    Ok(layout(&grid))
}

/// Generator sign table: one column per ambiguous set (elements stacked in
/// the header), one row of ± signs per generator.
pub fn render_sign_table(class: &AmbiguousClass) -> String {
    let code = class.code();
    let depth = class.degree_gamma();
    let mut grid: Vec<Vec<String>> = Vec::new();
    for r in 0..depth {
        let mut row = vec![String::new()];
        row.extend(
            class
                .sets()
                .iter()
                .map(|(_, v)| v.get(r).map(|e| e.to_string()).unwrap_or_default()),
        );
        grid.push(row);
    }
    for (i, g) in code.generators().iter().enumerate() {
        let mut row = vec![g.to_string()];
        row.extend(class.sets().iter().map(|(s, _)| {
            if s.sign(i) == 1 {
                "+".to_string()
            } else {
                "-".to_string()
            }
        }));
        grid.push(row);
    }
    layout(&grid)
}

/// Fixed-width left-aligned layout, two-space separators, no trailing blanks.
fn layout(grid: &[Vec<String>]) -> String {
    let cols = grid.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in grid {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in grid {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            let pad = widths[c] - cell.len();
            line.extend(std::iter::repeat(' ').take(pad));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::tests::q3;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn set_strings(class: &AmbiguousClass, syndrome: &str) -> Vec<String> {
        class
            .set_for(&syndrome.parse().unwrap())
            .unwrap()
            .iter()
            .map(|e| e.to_string())
            .collect()
    }

    #[test]
    fn q3_two_coordinate_class_matches_reference_partition() {
        let code = q3();
        let errors = ErrorSet::pauli_group_on(3, &[0, 1]).unwrap();
        let class = build_class(&code, &errors).unwrap();
        assert_eq!(class.order_sigma(), 4);
        assert_eq!(class.degree_gamma(), 4);
        assert_eq!(set_strings(&class, "++"), ["III", "IYI", "XXI", "XZI"]);
        assert_eq!(set_strings(&class, "+-"), ["IXI", "IZI", "XII", "XYI"]);
        assert_eq!(set_strings(&class, "-+"), ["YII", "YYI", "ZXI", "ZZI"]);
        assert_eq!(set_strings(&class, "--"), ["ZII", "YXI", "YZI", "ZYI"]);
    }

    #[test]
    fn reference_normalizer_mapping_is_reproduced() {
        let code = q3();
        // Z1Z2 and Y1 share the syndrome (-+); their product acts as -X_L
        let nm = ambiguity_normalizer(&code, &op("ZZI"), &op("YII")).unwrap();
        assert_eq!(nm.representative, op("XZI"));
        assert_eq!(nm.label(), "-X_L");
        // reversed order conjugates the product
        let rev = ambiguity_normalizer(&code, &op("YII"), &op("ZZI")).unwrap();
        assert_eq!(rev.product, nm.product.adjoint());
        assert_eq!(rev.label(), "-X_L");
        // same error twice gives the trivial action
        let triv = ambiguity_normalizer(&code, &op("IYI"), &op("IYI")).unwrap();
        assert!(triv.logical.is_identity());
        assert_eq!(triv.phase_exp, 0);
        // errors from different sets are rejected
        assert!(ambiguity_normalizer(&code, &op("XII"), &op("YII")).is_err());
    }

    #[test]
    fn commutation_matches_product_symmetry() {
        let code = q3();
        let errors = ErrorSet::pauli_group_on(3, &[0, 1]).unwrap();
        let class = build_class(&code, &errors).unwrap();
        for (_, set) in class.sets() {
            for a in set {
                for b in set {
                    let forward = a.multiply(b).unwrap();
                    let backward = b.multiply(a).unwrap();
                    assert_eq!(
                        a.commutes(b).unwrap(),
                        forward == backward,
                        "pair {a},{b}"
                    );
                    assert_eq!(backward, forward.adjoint());
                }
            }
        }
    }

    #[test]
    fn ambiguous_group_and_quotient_for_q3() {
        let code = q3();
        let (group, ok) = verify_ambiguous_group(&code, &[0, 1]).unwrap();
        assert!(ok);
        let strings: Vec<String> = group.iter().map(|e| e.to_string()).collect();
        assert_eq!(strings, ["III", "IYI", "XXI", "XZI"]);
        let cosets = quotient_structure(&code, &[0, 1]).unwrap();
        assert_eq!(cosets.len(), 4);
        assert!(cosets.iter().all(|c| c.len() == 4));
    }

    #[test]
    fn single_coordinate_class_is_unambiguous() {
        let code = q3();
        let errors = ErrorSet::pauli_group_on(3, &[0]).unwrap();
        let class = build_class(&code, &errors).unwrap();
        assert_eq!(class.order_sigma(), 4);
        assert_eq!(class.degree_gamma(), 1);
        let (group, ok) = verify_ambiguous_group(&code, &[0]).unwrap();
        assert!(ok);
        assert_eq!(group.len(), 1);
    }

    #[test]
    fn hamming_bound_examples() {
        assert_eq!(hamming_check(5, 1, 16), (true, true));
        assert_eq!(hamming_check(3, 1, 4), (true, true));
        assert_eq!(hamming_check(5, 1, 106), (false, false));
    }

    #[test]
    fn degree_formula_examples() {
        assert_eq!(degree_formula_check(3, 1, 2).unwrap(), 4);
        assert_eq!(degree_formula_check(4, 1, 2).unwrap(), 2);
        assert_eq!(degree_formula_check(5, 1, 2).unwrap(), 1);
        assert!(degree_formula_check(5, 1, 1).is_err());
    }

    #[test]
    fn coarse_grain_identity_and_merge() {
        let code = q3();
        let errors = ErrorSet::pauli_group_on(3, &[0, 1]).unwrap();
        let class = build_class(&code, &errors).unwrap();
        let same = coarse_grain(&class, &[]).unwrap();
        assert_eq!(same.order_sigma(), class.order_sigma());
        assert_eq!(same.degree_gamma(), class.degree_gamma());
        let merged = coarse_grain(&class, &[1]).unwrap();
        assert_eq!(merged.order_sigma(), 2);
        assert_eq!(merged.degree_gamma(), 8);
        assert_eq!(merged.element_count(), class.element_count());
    }

    #[test]
    fn error_set_counts() {
        assert_eq!(ErrorSet::weight_at_most(5, 2).unwrap().len(), 106);
        assert_eq!(ErrorSet::single_qubit_with_identity(5).unwrap().len(), 16);
        assert_eq!(ErrorSet::pauli_group_on(3, &[0, 1]).unwrap().len(), 16);
        assert!(ErrorSet::new(2, vec![op("XX"), op("-XX")]).is_err());
    }

    #[test]
    fn quotient_table_layout() {
        let code = q3();
        let table = render_quotient_table(&code, &[0, 1]).unwrap();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("++"));
        assert!(lines[0].trim_end().ends_with('N'));
        assert!(lines[1].contains("I_L"));
        assert!(lines[4].contains("-X_L"));
    }
}
