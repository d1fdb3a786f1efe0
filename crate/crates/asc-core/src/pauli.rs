//! Exact phase-tracked Pauli-group arithmetic over up to eight qubits.
//!
//! An operator is stored in symplectic form: X bits, Z bits, and a global
//! phase exponent q with the operator equal to i^q times the tensor product
//! of Hermitian letters, where the letter with both bits set is Y = iXZ.
//! Under this convention `YYZ` has phase exponent 0 and X·Z = −iY.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hard design ceiling on qubit count; dense matrices stay at most 256×256.
pub const MAX_QUBITS: usize = 8;

/// Phase-tracked n-qubit Pauli operator.
///
/// Bit j (counting from 0) of `x_bits`/`z_bits` refers to qubit j+1, the
/// (j+1)-th letter from the left; the subscript name X_1 is the leftmost
/// tensor factor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOperator {
    n: u8,
    x: u8,
    z: u8,
    phase: u8,
}

impl PauliOperator {
    /// Builds an operator from raw bit masks. `phase_exp` is reduced mod 4.
    pub fn new(n: usize, x_bits: u8, z_bits: u8, phase_exp: u8) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange { n });
        }
        let mask = ones(n);
        Ok(Self {
            n: n as u8,
            x: x_bits & mask,
            z: z_bits & mask,
            phase: phase_exp % 4,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, 0, 0, 0)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u8 {
        self.x
    }

    pub fn z_bits(&self) -> u8 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        self.x >> qubit & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        self.z >> qubit & 1 == 1
    }

    /// Letter on the given qubit (0-based), ignoring the global phase.
    pub fn letter(&self, qubit: usize) -> char {
        match (self.x_bit(qubit), self.z_bit(qubit)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0 && self.phase == 0
    }

    /// Same letters with the global phase cleared; the Hermitian class
    /// representative.
    pub fn phase0(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase_exp: u8) -> Self {
        Self {
            phase: phase_exp % 4,
            ..*self
        }
    }

    /// Hermitian conjugate. Letters are Hermitian, so only the phase flips.
    pub fn adjoint(&self) -> Self {
        Self {
            phase: (4 - self.phase) % 4,
            ..*self
        }
    }

    /// Group product. The phase bookkeeping follows from writing each letter
    /// as i^{xz} X^x Z^z and commuting the factors into canonical order.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mut q = u32::from(self.phase) + u32::from(other.phase);
        for j in 0..self.n() {
            let x1 = u32::from(self.x_bit(j));
            let z1 = u32::from(self.z_bit(j));
            let x2 = u32::from(other.x_bit(j));
            let z2 = u32::from(other.z_bit(j));
            let x3 = x1 ^ x2;
            let z3 = z1 ^ z2;
            // i^{x1 z1} i^{x2 z2} (−1)^{z1 x2} i^{−x3 z3}
            q += x1 * z1 + x2 * z2 + 2 * z1 * x2 + 3 * x3 * z3;
        }
        Ok(Self {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: (q % 4) as u8,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let overlap = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(overlap % 2 == 0)
    }

    /// Dense 2^n × 2^n matrix with exact entries in {0, ±1, ±i} times i^q.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, phase_factor(self.phase));
        for j in 0..self.n() {
            m = m.kronecker(&letter_matrix(self.letter(j)));
        }
        m
    }

    /// Places an m-qubit operator on the listed coordinates (0-based,
    /// strictly increasing not required but repeats are rejected) of an
    /// n-qubit register, identity elsewhere.
    pub fn embed(&self, n: usize, coords: &[usize]) -> Result<Self> {
        if coords.len() != self.n() {
            return Err(Error::DimensionMismatch {
                left: coords.len(),
                right: self.n(),
            });
        }
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange { n });
        }
        let mut x = 0u8;
        let mut z = 0u8;
        let mut seen = [false; MAX_QUBITS];
        for (j, &c) in coords.iter().enumerate() {
            if c >= n {
                return Err(Error::CoordinateOutOfRange { coord: c, n });
            }
            if seen[c] {
                return Err(Error::RepeatedCoordinate {
                    coords: coords.to_vec(),
                });
            }
            seen[c] = true;
            if self.x_bit(j) {
                x |= 1 << c;
            }
            if self.z_bit(j) {
                z |= 1 << c;
            }
        }
        Ok(Self {
            n: n as u8,
            x,
            z,
            phase: self.phase,
        })
    }

    /// Restriction to the listed coordinates; letters elsewhere must be I.
    pub fn restrict(&self, coords: &[usize]) -> Result<Self> {
        let mut x = 0u8;
        let mut z = 0u8;
        for (j, &c) in coords.iter().enumerate() {
            if c >= self.n() {
                return Err(Error::CoordinateOutOfRange { coord: c, n: self.n() });
            }
            if self.x_bit(c) {
                x |= 1 << j;
            }
            if self.z_bit(c) {
                z |= 1 << j;
            }
        }
        Self::new(coords.len(), x, z, self.phase)
    }

    /// Index of the phase-0 letter string in lexicographic order I < X < Y < Z,
    /// the ordering used for process-matrix bases.
    pub fn basis_index(&self) -> usize {
        let mut idx = 0;
        for j in 0..self.n() {
            let l = match self.letter(j) {
                'I' => 0,
                'X' => 1,
                'Y' => 2,
                _ => 3,
            };
            idx = idx * 4 + l;
        }
        idx
    }

    pub fn from_basis_index(n: usize, index: usize) -> Result<Self> {
        if index >= 1 << (2 * n) {
            return Err(Error::MalformedInput {
                what: "basis index".into(),
                reason: format!("{index} out of range for {n} qubits"),
            });
        }
        let mut x = 0u8;
        let mut z = 0u8;
        for j in 0..n {
            let l = index >> (2 * (n - 1 - j)) & 3;
            if l == 1 || l == 2 {
                x |= 1 << j;
            }
            if l == 2 || l == 3 {
                z |= 1 << j;
            }
        }
        Self::new(n, x, z, 0)
    }

    /// All 4^n phase-0 operators in lexicographic letter order.
    pub fn all_phase0(n: usize) -> impl Iterator<Item = PauliOperator> {
        (0..1usize << (2 * n)).map(move |i| PauliOperator::from_basis_index(n, i).expect("index in range"))
    }

    /// Parses either the plain letter form or the subscripted shorthand
    /// ("X_1 Z_2") against an explicit qubit count.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange { n });
        }
        let (phase, body) = split_phase(text.trim());
        if body.contains('_') {
            let mut x = 0u8;
            let mut z = 0u8;
            let mut seen = 0u8;
            for token in body.split_whitespace() {
                let (letter, index) = token.split_once('_').ok_or_else(|| malformed(text, "expected LETTER_INDEX token"))?;
                let qubit: usize = index
                    .parse()
                    .map_err(|_| malformed(text, "subscript is not a number"))?;
                if qubit == 0 || qubit > n {
                    return Err(malformed(text, "subscript outside 1..=n"));
                }
                let j = qubit - 1;
                if seen >> j & 1 == 1 {
                    return Err(malformed(text, "repeated qubit subscript"));
                }
                seen |= 1 << j;
                match letter {
                    "X" => x |= 1 << j,
                    "Y" => {
                        x |= 1 << j;
                        z |= 1 << j;
                    }
                    "Z" => z |= 1 << j,
                    "I" => {}
                    _ => return Err(malformed(text, "letter must be one of I, X, Y, Z")),
                }
            }
            Self::new(n, x, z, phase)
        } else {
            let op = parse_letters(body, phase).map_err(|reason| malformed(text, &reason))?;
            if op.n() != n {
                return Err(Error::DimensionMismatch { left: op.n(), right: n });
            }
            Ok(op)
        }
    }
}

fn ones(n: usize) -> u8 {
    if n >= 8 {
        0xff
    } else {
        (1u8 << n) - 1
    }
}

pub(crate) fn phase_factor(q: u8) -> Complex64 {
    match q % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn letter_matrix(letter: char) -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let p = Complex64::new(1.0, 0.0);
    let m = Complex64::new(-1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mi = Complex64::new(0.0, -1.0);
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[p, o, o, p]),
        'X' => DMatrix::from_row_slice(2, 2, &[o, p, p, o]),
        'Y' => DMatrix::from_row_slice(2, 2, &[o, mi, i, o]),
        _ => DMatrix::from_row_slice(2, 2, &[p, o, o, m]),
    }
}

fn split_phase(text: &str) -> (u8, &str) {
    if let Some(rest) = text.strip_prefix("-i") {
        (3, rest)
    } else if let Some(rest) = text.strip_prefix("+i") {
        (1, rest)
    } else if let Some(rest) = text.strip_prefix('i') {
        (1, rest)
    } else if let Some(rest) = text.strip_prefix('-') {
        (2, rest)
    } else if let Some(rest) = text.strip_prefix('+') {
        (0, rest)
    } else {
        (0, text)
    }
}

fn parse_letters(body: &str, phase: u8) -> std::result::Result<PauliOperator, String> {
    if body.is_empty() {
        return Err("no letters".into());
    }
    if body.len() > MAX_QUBITS {
        return Err(format!("{} letters exceeds the {MAX_QUBITS}-qubit ceiling", body.len()));
    }
    let mut x = 0u8;
    let mut z = 0u8;
    for (j, c) in body.chars().enumerate() {
        match c {
            'I' => {}
            'X' => x |= 1 << j,
            'Y' => {
                x |= 1 << j;
                z |= 1 << j;
            }
            'Z' => z |= 1 << j,
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(PauliOperator {
        n: body.len() as u8,
        x,
        z,
        phase: phase % 4,
    })
}

fn malformed(text: &str, reason: &str) -> Error {
    Error::MalformedPauli {
        text: text.to_string(),
        reason: reason.to_string(),
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Plain letter form with optional phase prefix; qubit count is the
    /// letter count. The subscripted form needs an explicit n, see `parse`.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = split_phase(s.trim());
        parse_letters(body, phase).map_err(|reason| malformed(s, &reason))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => {}
        }
        for j in 0..self.n() {
            write!(f, "{}", self.letter(j))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn involution_and_forced_phase() {
        let x = p("X");
        let xx = x.multiply(&x).unwrap();
        assert!(xx.is_identity());
        // X·Z = −iY under Y = iXZ
        let xz = p("X").multiply(&p("Z")).unwrap();
        assert_eq!((xz.x_bits(), xz.z_bits(), xz.phase_exp()), (1, 1, 3));
        assert_eq!(xz.to_string(), "-iY");
    }

    #[test]
    fn remaining_single_qubit_products() {
        // XY = iZ, YZ = iX, reversed orders pick up −i
        assert_eq!(p("X").multiply(&p("Y")).unwrap().to_string(), "iZ");
        assert_eq!(p("Y").multiply(&p("Z")).unwrap().to_string(), "iX");
        assert_eq!(p("Y").multiply(&p("X")).unwrap().to_string(), "-iZ");
        assert_eq!(p("Z").multiply(&p("Y")).unwrap().to_string(), "-iX");
        assert_eq!(p("Z").multiply(&p("X")).unwrap().to_string(), "iY");
    }

    #[test]
    fn canonical_phase_of_yyz() {
        // YYZ assembled letter by letter as (iX_1·Z_1)(iX_2·Z_2)(Z_3)
        let i = PauliOperator::identity(3).unwrap().with_phase(1);
        let factor = |a: &str, b: &str| {
            i.multiply(&p(a)).unwrap().multiply(&p(b)).unwrap()
        };
        let chain = factor("XII", "ZII")
            .multiply(&factor("IXI", "IZI"))
            .unwrap()
            .multiply(&p("IIZ"))
            .unwrap();
        assert_eq!(chain, p("YYZ"));
        assert_eq!(chain.phase_exp(), 0);
    }

    #[test]
    fn matrix_oracle_products() {
        let a = p("XIX");
        let b = p("YYZ");
        let prod = a.multiply(&b).unwrap();
        assert_eq!(prod.to_matrix(), a.to_matrix() * b.to_matrix());
        assert!(a.commutes(&b).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
    }

    #[test]
    fn y_matrix_is_standard() {
        let y = p("Y").to_matrix();
        assert_eq!(y[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let m = p("-iYYZ").to_matrix();
        let oracle = p("YYZ").to_matrix() * Complex64::new(0.0, -1.0);
        assert_eq!(m, oracle);
    }

    #[test]
    fn commutes_matches_dense_commutator_exhaustively_n2() {
        for a in PauliOperator::all_phase0(2) {
            for b in PauliOperator::all_phase0(2) {
                let lhs = a.to_matrix() * b.to_matrix();
                let rhs = b.to_matrix() * a.to_matrix();
                assert_eq!(a.commutes(&b).unwrap(), lhs == rhs, "pair {a} {b}");
            }
        }
    }

    #[test]
    fn parse_forms() {
        let plain = p("XIX");
        assert_eq!((plain.x_bits(), plain.z_bits(), plain.phase_exp()), (0b101, 0, 0));
        let minus_x = p("-X");
        assert_eq!((minus_x.x_bits(), minus_x.z_bits(), minus_x.phase_exp()), (1, 0, 2));
        let sub = PauliOperator::parse("X_1 Z_2", 3).unwrap();
        assert_eq!(sub, p("XZI"));
        let phased = PauliOperator::parse("-i X_2", 2).unwrap_or_else(|_| {
            // prefix without space is the canonical spelling
            PauliOperator::parse("-iX_2", 2).unwrap()
        });
        assert_eq!(phased, p("-iIX"));
        assert!(PauliOperator::parse("XX", 3).is_err());
        assert!("XQ".parse::<PauliOperator>().is_err());
        assert!("".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn display_round_trip() {
        for text in ["XIX", "-X", "iZY", "-iYYZ", "IIII"] {
            let op: PauliOperator = text.parse().unwrap();
            assert_eq!(op.to_string(), text);
            assert_eq!(op.to_string().parse::<PauliOperator>().unwrap(), op);
        }
    }

    #[test]
    fn embed_and_restrict() {
        let xz = p("XZ");
        let wide = xz.embed(4, &[0, 2]).unwrap();
        assert_eq!(wide, p("XIZI"));
        assert_eq!(wide.restrict(&[0, 2]).unwrap(), xz);
        assert!(xz.embed(4, &[1, 1]).is_err());
        assert!(xz.embed(2, &[0, 3]).is_err());
    }

    #[test]
    fn basis_index_round_trip() {
        for (i, op) in PauliOperator::all_phase0(2).enumerate() {
            assert_eq!(op.basis_index(), i);
            assert_eq!(PauliOperator::from_basis_index(2, i).unwrap(), op);
        }
        // lexicographic: II, IX, IY, IZ, XI, ...
        assert_eq!(PauliOperator::from_basis_index(2, 1).unwrap(), p("IX"));
        assert_eq!(PauliOperator::from_basis_index(2, 4).unwrap(), p("XI"));
    }

    #[test]
    fn adjoint_flips_phase_only() {
        let op = p("iXZ");
        assert_eq!(op.adjoint().to_string(), "-iXZ");
        let herm = p("-YY");
        assert_eq!(herm.adjoint(), herm);
    }
}
