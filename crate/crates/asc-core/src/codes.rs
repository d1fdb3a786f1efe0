//! Built-in code catalog.
//!
//! Five fixed codes are shipped: the three-qubit bit-flip-style code `q3`,
//! the five-qubit perfect code `q5`, and a family of three four-qubit codes
//! `C1`, `C2`, `C3` related by single-qubit basis changes.  Each entry
//! carries the coordinates designated as noisy for ambiguity analysis and a
//! note recording any corrections applied to the reference data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{letter_matrix, PauliOperator};
use crate::stabilizer::StabilizerCode;

/// Tolerance for matching a conjugated letter against a Pauli letter.
const PAULI_MAP_TOL: f64 = 1e-10;

/// One catalog entry: a code together with its designated noisy coordinates.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    id: String,
    code: StabilizerCode,
    noisy_coords: Vec<usize>,
    note: String,
}

impl CatalogEntry {
    /// Catalog identifier (`q3`, `q5`, `C1`, `C2`, `C3`).
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The stabilizer code itself.
    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    /// Coordinates the noise model is allowed to touch.
    pub fn noisy_coords(&self) -> &[usize] {
        &self.noisy_coords
    }

    /// Free-form note on the origin of the entry's data.
    pub fn note(&self) -> &str {
        &self.note
    }
}

/// All catalog identifiers, in canonical order.
pub fn all_ids() -> [&'static str; 5] {
    ["q3", "q5", "C1", "C2", "C3"]
}

/// Look up a catalog entry by identifier.
pub fn get(id: &str) -> Result<CatalogEntry> {
    match id {
        "q3" => build_q3(),
        "q5" => build_q5(),
        "C1" => build_c1(),
        "C2" => build_c2(),
        "C3" => build_c3(),
        _ => Err(Error::UnknownCode { id: id.to_string() }),
    }
}

/// Single-qubit basis change that fixes X and exchanges Z and Y.
///
/// Conjugation acts as X -> X, Z -> Y, Y -> -Z.
pub fn h_zy() -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
            Complex64::new(0.0, s),
            Complex64::new(s, 0.0),
        ],
    )
}

/// Single-qubit basis change that cycles X -> Z, Y -> X, Z -> Y.
pub fn h_yx() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5, 0.5),
            Complex64::new(0.5, 0.5),
            Complex64::new(-0.5, 0.5),
            Complex64::new(0.5, -0.5),
        ],
    )
}

/// Conjugate a code by a single-qubit unitary applied to every qubit.
///
/// Each generator is conjugated letterwise; the result must again be a Pauli
/// operator (up to an overall power of i), otherwise the map is rejected.
/// Code words are transformed by the tensor power of the unitary, so the
/// returned code stabilizes them by construction.
pub fn transform_code(code: &StabilizerCode, u: &DMatrix<Complex64>) -> Result<StabilizerCode> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::NotAPauliMap {
            reason: format!("expected a 2x2 matrix, got {}x{}", u.nrows(), u.ncols()),
        });
    }
    let unitarity = (u * u.adjoint() - DMatrix::<Complex64>::identity(2, 2)).camax();
    if unitarity > PAULI_MAP_TOL {
        return Err(Error::NotAPauliMap {
            reason: format!("matrix is not unitary (residual {unitarity:.3e})"),
        });
    }

    let n = code.n();
    let mut generators = Vec::with_capacity(code.generators().len());
    for gen in code.generators() {
        generators.push(conjugate_operator(gen, u)?);
    }

    let tensor = tensor_power(u, n);
    let codewords: Vec<DVector<Complex64>> =
        code.codewords().iter().map(|w| &tensor * w).collect();

    StabilizerCode::new(n, code.k(), generators, codewords)
}

/// Conjugate one Pauli operator letterwise by a single-qubit unitary.
fn conjugate_operator(op: &PauliOperator, u: &DMatrix<Complex64>) -> Result<PauliOperator> {
    let mut phase = crate::pauli::phase_factor(op.phase_exp());
    let mut x_bits = 0u8;
    let mut z_bits = 0u8;
    for q in 0..op.n() as usize {
        let (letter, factor) = conjugate_letter(u, op.letter(q))?;
        phase *= factor;
        let (x, z) = letter_bits(letter);
        x_bits |= x << q;
        z_bits |= z << q;
    }
    let phase_exp = match_phase_exp(phase).ok_or_else(|| Error::NotAPauliMap {
        reason: format!("conjugate of {op} carries a non-Pauli phase {phase}"),
    })?;
    PauliOperator::new(op.n(), x_bits, z_bits, phase_exp)
}

/// Map one Pauli letter through conjugation, returning the image letter and
/// its scalar factor.
fn conjugate_letter(u: &DMatrix<Complex64>, letter: char) -> Result<(char, Complex64)> {
    let image = u * letter_matrix(letter) * u.adjoint();
    for candidate in ['I', 'X', 'Y', 'Z'] {
        let basis = letter_matrix(candidate);
        // Unitary Pauli letters have tr(L^2) = 2, so this is the projection
        // coefficient of the image onto the candidate.
        let coeff = (basis.adjoint() * &image).trace() / Complex64::new(2.0, 0.0);
        if (coeff.norm() - 1.0).abs() > PAULI_MAP_TOL {
            continue;
        }
        let residual = (&image - basis * coeff).camax();
        if residual <= PAULI_MAP_TOL {
            return Ok((candidate, coeff));
        }
    }
    Err(Error::NotAPauliMap {
        reason: format!("conjugate of {letter} is not proportional to a Pauli letter"),
    })
}

fn letter_bits(letter: char) -> (u8, u8) {
    match letter {
        'I' => (0, 0),
        'X' => (1, 0),
        'Y' => (1, 1),
        'Z' => (0, 1),
        _ => unreachable!("conjugate_letter only returns Pauli letters"),
    }
}

fn match_phase_exp(phase: Complex64) -> Option<u8> {
    (0..4).find(|&q| (phase - crate::pauli::phase_factor(q)).norm() <= PAULI_MAP_TOL)
}

fn tensor_power(u: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(u);
    }
    out
}

/// Build a code-word vector from a sparse list of `(basis index, sign)` pairs
/// sharing a common positive amplitude.
fn sparse_ket(n: usize, amplitude: f64, terms: &[(usize, f64)]) -> DVector<Complex64> {
    let dim = 1usize << n;
    let mut ket = DVector::<Complex64>::zeros(dim);
    for &(index, sign) in terms {
        ket[index] = Complex64::new(sign * amplitude, 0.0);
    }
    ket
}

fn parse_generators(n: usize, texts: &[&str]) -> Result<Vec<PauliOperator>> {
    texts
        .iter()
        .map(|text| PauliOperator::parse(text, n))
        .collect()
}

fn build_q3() -> Result<CatalogEntry> {
    let generators = parse_generators(3, &["XIX", "YYZ"])?;
    let half = 0.5;
    // |0_L> = (|001> + |010> + |100> + |111>) / 2
    let zero = sparse_ket(3, half, &[(1, 1.0), (2, 1.0), (4, 1.0), (7, 1.0)]);
    // |1_L> = (-|000> + |011> - |101> + |110>) / 2
    let one = sparse_ket(3, half, &[(0, -1.0), (3, 1.0), (5, -1.0), (6, 1.0)]);
    let code = StabilizerCode::new(3, 1, generators, vec![zero, one])?;
    Ok(CatalogEntry {
        id: "q3".to_string(),
        code,
        noisy_coords: vec![0, 1],
        note: "Three-qubit code with generators XIX and YYZ; code words as \
               fixed in the reference data."
            .to_string(),
    })
}

fn build_q5() -> Result<CatalogEntry> {
    let generators = parse_generators(5, &["IXXYY", "IYYXX", "XIYZY", "YXYIZ"])?;
    let amp = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    // |0_L> = (-|00000> + |01111> - |10011> + |11100>
    //          + |00110> + |01001> + |10101> + |11010>) / (2 sqrt 2)
    let zero = sparse_ket(
        5,
        amp,
        &[
            (0b00000, -1.0),
            (0b01111, 1.0),
            (0b10011, -1.0),
            (0b11100, 1.0),
            (0b00110, 1.0),
            (0b01001, 1.0),
            (0b10101, 1.0),
            (0b11010, 1.0),
        ],
    );
    // |1_L> = (-|11111> + |10000> + |01100> - |00011>
    //          + |11001> + |10110> - |01010> - |00101>) / (2 sqrt 2)
    let one = sparse_ket(
        5,
        amp,
        &[
            (0b11111, -1.0),
            (0b10000, 1.0),
            (0b01100, 1.0),
            (0b00011, -1.0),
            (0b11001, 1.0),
            (0b10110, 1.0),
            (0b01010, -1.0),
            (0b00101, -1.0),
        ],
    );
    let code = StabilizerCode::new(5, 1, generators, vec![zero, one])?;
    Ok(CatalogEntry {
        id: "q5".to_string(),
        code,
        noisy_coords: vec![0, 1],
        note: "Five-qubit perfect code.  One ket of |0_L> circulates with a \
               dropped bit (|0111>); it is completed to |01111>, which the \
               generator checks confirm."
            .to_string(),
    })
}

fn c1_codewords() -> (DVector<Complex64>, DVector<Complex64>) {
    let amp = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    // |0_L> = (-|0000> + |0010> + |0101> + |0111>
    //          - |1001> + |1011> + |1100> + |1110>) / (2 sqrt 2)
    let zero = sparse_ket(
        4,
        amp,
        &[
            (0b0000, -1.0),
            (0b0010, 1.0),
            (0b0101, 1.0),
            (0b0111, 1.0),
            (0b1001, -1.0),
            (0b1011, 1.0),
            (0b1100, 1.0),
            (0b1110, 1.0),
        ],
    );
    // |1_L> = (-|1111> + |1101> + |1010> + |1000>
    //          - |0110> + |0100> + |0011> + |0001>) / (2 sqrt 2)
    let one = sparse_ket(
        4,
        amp,
        &[
            (0b1111, -1.0),
            (0b1101, 1.0),
            (0b1010, 1.0),
            (0b1000, 1.0),
            (0b0110, -1.0),
            (0b0100, 1.0),
            (0b0011, 1.0),
            (0b0001, 1.0),
        ],
    );
    (zero, one)
}

fn build_c1() -> Result<CatalogEntry> {
    let generators = parse_generators(4, &["XIIX", "YIXY", "YYZZ"])?;
    let (zero, one) = c1_codewords();
    let code = StabilizerCode::new(4, 1, generators, vec![zero, one])?;
    Ok(CatalogEntry {
        id: "C1".to_string(),
        code,
        noisy_coords: vec![0, 1],
        note: "Four-qubit code, first member of the C family; qubits 1 and 2 \
               are the designated noisy pair."
            .to_string(),
    })
}

/// Generators and code words for C2 and C3 come from conjugating C1 by a
/// fixed single-qubit basis change on every qubit.  The generating sets below
/// span the same stabilizer groups as the conjugated C1 generators but are
/// listed in the order that fixes the syndrome labeling.
fn build_c2() -> Result<CatalogEntry> {
    let generators = parse_generators(4, &["IZZX", "XIIX", "YZYZ"])?;
    let (zero, one) = c1_codewords();
    let tensor = tensor_power(&h_zy(), 4);
    let code = StabilizerCode::new(4, 1, generators, vec![&tensor * zero, &tensor * one])?;
    Ok(CatalogEntry {
        id: "C2".to_string(),
        code,
        noisy_coords: vec![0, 1],
        note: "C1 conjugated by the Z<->Y basis change on every qubit; \
               generators listed in syndrome order IZZX, XIIX, YZYZ."
            .to_string(),
    })
}

fn build_c3() -> Result<CatalogEntry> {
    let generators = parse_generators(4, &["IXXZ", "XIZX", "YXYX"])?;
    let (zero, one) = c1_codewords();
    let tensor = tensor_power(&h_yx(), 4);
    let code = StabilizerCode::new(4, 1, generators, vec![&tensor * zero, &tensor * one])?;
    Ok(CatalogEntry {
        id: "C3".to_string(),
        code,
        noisy_coords: vec![0, 1],
        note: "C1 conjugated by the X->Z->Y->X basis change on every qubit.  \
               The second generator is XIZX; an XIXZ variant anticommutes \
               with YXYX and fails to stabilize the transformed code words."
            .to_string(),
    })
}

/// Result of checking one catalog entry.
#[derive(Debug, Clone)]
pub struct EntryCheck {
    /// Catalog identifier.
    pub id: String,
    /// Entry constructed and passed the stabilizer-code validity checks.
    pub constructed: bool,
    /// Ambiguous-set partition on the noisy coordinates matches the
    /// reference partition (only recorded for entries with one on file).
    pub partition_ok: Option<bool>,
    /// Failures, if any, in human-readable form.
    pub problems: Vec<String>,
}

/// Result of validating the whole catalog.
#[derive(Debug, Clone)]
pub struct CatalogReport {
    /// Per-entry check outcomes.
    pub checks: Vec<EntryCheck>,
    /// Corrections applied to the reference data, stated as facts.
    pub errata: Vec<String>,
}

impl CatalogReport {
    /// True when every entry constructed and every recorded partition matched.
    pub fn all_ok(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.constructed && c.partition_ok.unwrap_or(true) && c.problems.is_empty())
    }
}

/// Reference ambiguous-set partitions for the two-qubit noisy pair, keyed by
/// syndrome sign string.  Sets are written on the noisy coordinates only.
const Q3_PARTITION: [(&str, [&str; 4]); 4] = [
    ("++", ["II", "IY", "XX", "XZ"]),
    ("+-", ["IX", "IZ", "XI", "XY"]),
    ("-+", ["YI", "YY", "ZX", "ZZ"]),
    ("--", ["ZI", "YX", "YZ", "ZY"]),
];

const C1_PARTITION: [(&str, [&str; 2]); 8] = [
    ("+++", ["II", "IY"]),
    ("++-", ["IX", "IZ"]),
    ("+-+", ["XX", "XZ"]),
    ("+--", ["XI", "XY"]),
    ("-++", ["YI", "YY"]),
    ("-+-", ["YX", "YZ"]),
    ("--+", ["ZX", "ZZ"]),
    ("---", ["ZI", "ZY"]),
];

const C2_PARTITION: [(&str, [&str; 2]); 8] = [
    ("+++", ["II", "IZ"]),
    ("++-", ["XI", "XZ"]),
    ("+-+", ["YI", "YZ"]),
    ("+--", ["ZI", "ZZ"]),
    ("-++", ["XX", "XY"]),
    ("-+-", ["IX", "IY"]),
    ("--+", ["ZX", "ZY"]),
    ("---", ["YX", "YY"]),
];

const C3_PARTITION: [(&str, [&str; 2]); 8] = [
    ("+++", ["II", "IX"]),
    ("++-", ["XI", "XX"]),
    ("+-+", ["YI", "YX"]),
    ("+--", ["ZI", "ZX"]),
    ("-++", ["XY", "XZ"]),
    ("-+-", ["IY", "IZ"]),
    ("--+", ["ZY", "ZZ"]),
    ("---", ["YY", "YZ"]),
];

/// Compare an entry's ambiguous-set partition on its noisy coordinates
/// against a reference partition given as syndrome/set-string pairs.
fn check_partition(
    entry: &CatalogEntry,
    reference: &[(&str, &[&str])],
) -> Result<(bool, Vec<String>)> {
    let errors = crate::ambiguity::ErrorSet::pauli_group_on(entry.code.n(), &entry.noisy_coords)?;
    let class = crate::ambiguity::build_class(&entry.code, &errors)?;
    let mut ok = true;
    let mut problems = Vec::new();
    if class.order_sigma() != reference.len() {
        ok = false;
        problems.push(format!(
            "{}: expected {} syndromes, found {}",
            entry.id,
            reference.len(),
            class.order_sigma()
        ));
    }
    for (syndrome_text, expected) in reference {
        let syndrome: crate::stabilizer::Syndrome = syndrome_text.parse()?;
        let Some(actual) = class.set_for(&syndrome) else {
            ok = false;
            problems.push(format!("{}: syndrome {syndrome_text} missing", entry.id));
            continue;
        };
        let mut actual_strings: Vec<String> = actual
            .iter()
            .map(|op| op.restrict(&entry.noisy_coords).map(|r| r.to_string()))
            .collect::<Result<_>>()?;
        actual_strings.sort();
        let mut expected_strings: Vec<String> =
            expected.iter().map(|s| s.to_string()).collect();
        expected_strings.sort();
        if actual_strings != expected_strings {
            ok = false;
            problems.push(format!(
                "{}: syndrome {syndrome_text} holds {actual_strings:?}, expected {expected_strings:?}",
                entry.id
            ));
        }
    }
    Ok((ok, problems))
}

/// Rebuild every catalog entry and check it against the reference data.
pub fn validate_catalog() -> Result<CatalogReport> {
    let mut checks = Vec::new();
    for id in all_ids() {
        let mut check = EntryCheck {
            id: id.to_string(),
            constructed: false,
            partition_ok: None,
            problems: Vec::new(),
        };
        match get(id) {
            Ok(entry) => {
                check.constructed = true;
                let reference: Option<Vec<(&str, &[&str])>> = match id {
                    "q3" => Some(
                        Q3_PARTITION
                            .iter()
                            .map(|(s, e)| (*s, e.as_slice()))
                            .collect(),
                    ),
                    "C1" => Some(
                        C1_PARTITION
                            .iter()
                            .map(|(s, e)| (*s, e.as_slice()))
                            .collect(),
                    ),
                    "C2" => Some(
                        C2_PARTITION
                            .iter()
                            .map(|(s, e)| (*s, e.as_slice()))
                            .collect(),
                    ),
                    "C3" => Some(
                        C3_PARTITION
                            .iter()
                            .map(|(s, e)| (*s, e.as_slice()))
                            .collect(),
                    ),
                    _ => None,
                };
                if let Some(reference) = reference {
                    let (ok, problems) = check_partition(&entry, &reference)?;
                    check.partition_ok = Some(ok);
                    check.problems.extend(problems);
                }
            }
            Err(err) => check.problems.push(format!("{id}: {err}")),
        }
        checks.push(check);
    }
    let errata = vec![
        "q5 |0_L>: the four-bit ket |0111> is completed to |01111>; all four \
         generators stabilize the completed code word."
            .to_string(),
        "C3 generators: XIXZ anticommutes with YXYX, so the second generator \
         is XIZX, which commutes and stabilizes the transformed code words."
            .to_string(),
    ];
    Ok(CatalogReport { checks, errata })
}
