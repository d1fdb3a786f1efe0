//! Stabilizer codes: code words, code-space projectors, syndromes,
//! normalizer enumeration, and logical-Pauli classification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

const ORTHO_TOL: f64 = 1e-12;
const ACTION_TOL: f64 = 1e-10;

/// Generator eigenvalue pattern labelling an erroneous subspace.
///
/// Signs are ordered by generator index. The derived ordering sorts `+`
/// before `-`, so sorted syndrome lists start at the no-error pattern.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Syndrome {
    minus: Vec<bool>,
}

impl Syndrome {
    pub fn new(signs: &[i8]) -> Result<Self> {
        let mut minus = Vec::with_capacity(signs.len());
        for &s in signs {
            match s {
                1 => minus.push(false),
                -1 => minus.push(true),
                other => {
                    return Err(Error::MalformedInput {
                        what: "syndrome".into(),
                        reason: format!("sign {other} is not +1 or -1"),
                    })
                }
            }
        }
        Ok(Self { minus })
    }

    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }

    /// Sign for generator i as +1 or -1.
    pub fn sign(&self, i: usize) -> i8 {
        if self.minus[i] {
            -1
        } else {
            1
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.len()).map(|i| self.sign(i)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.minus.iter().all(|&m| !m)
    }

    /// Elementwise product of sign patterns.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(Self {
            minus: self
                .minus
                .iter()
                .zip(&other.minus)
                .map(|(&a, &b)| a ^ b)
                .collect(),
        })
    }

    /// Sign pattern with the listed generator positions removed; models a
    /// coarse-grained measurement that skips those generators.
    pub fn drop_positions(&self, dropped: &[usize]) -> Self {
        Self {
            minus: self
                .minus
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, &m)| m)
                .collect(),
        }
    }
}

impl PartialOrd for Syndrome {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Syndrome {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // false (+) sorts before true (-)
        self.minus.cmp(&other.minus)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.minus {
            write!(f, "{}", if m { '-' } else { '+' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Syndrome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut minus = Vec::new();
        for c in s.trim().chars() {
            match c {
                '+' => minus.push(false),
                '-' => minus.push(true),
                other => {
                    return Err(Error::MalformedInput {
                        what: "syndrome".into(),
                        reason: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
        if minus.is_empty() {
            return Err(Error::MalformedInput {
                what: "syndrome".into(),
                reason: "empty sign string".into(),
            });
        }
        Ok(Self { minus })
    }
}

/// [[n,k]] stabilizer code with explicit logical code words.
#[derive(Clone)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    generators: Vec<PauliOperator>,
    codewords: Vec<DVector<Complex64>>,
}

impl StabilizerCode {
    /// Validates generators and code words together.
    pub fn new(
        n: usize,
        k: usize,
        generators: Vec<PauliOperator>,
        codewords: Vec<DVector<Complex64>>,
    ) -> Result<Self> {
        check_generators(n, k, &generators)?;
        if codewords.len() != 1 << k {
            return Err(Error::InvalidCode {
                reason: format!("expected {} code words, got {}", 1 << k, codewords.len()),
            });
        }
        let dim = 1usize << n;
        for (j, w) in codewords.iter().enumerate() {
            if w.len() != dim {
                return Err(Error::InvalidCode {
                    reason: format!("code word {j} has dimension {} (expected {dim})", w.len()),
                });
            }
        }
        for i in 0..codewords.len() {
            for j in 0..codewords.len() {
                let overlap = codewords[i].dotc(&codewords[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (overlap - Complex64::new(target, 0.0)).norm() > 1e-9 {
                    return Err(Error::InvalidCode {
                        reason: format!("code words {i},{j} not orthonormal (overlap {overlap})"),
                    });
                }
            }
        }
        for g in &generators {
            let gm = g.to_matrix();
            for (j, w) in codewords.iter().enumerate() {
                let image = &gm * w;
                if (&image - w).camax() > 1e-9 {
                    return Err(Error::InvalidCode {
                        reason: format!("generator {g} does not stabilize code word {j}"),
                    });
                }
            }
        }
        Ok(Self {
            n,
            k,
            generators,
            codewords,
        })
    }

    /// Derives a code-word basis from the generators alone by projecting
    /// computational basis states and orthonormalizing in scan order. The
    /// first nonzero amplitude of each derived ket is made real positive.
    pub fn from_generators(n: usize, k: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        check_generators(n, k, &generators)?;
        let projector = projector_of(&generators, n);
        let dim = 1usize << n;
        let mut kept: Vec<DVector<Complex64>> = Vec::new();
        for i in 0..dim {
            if kept.len() == 1 << k {
                break;
            }
            let mut v: DVector<Complex64> = projector.column(i).into_owned();
            for u in &kept {
                let c = u.dotc(&v);
                v -= u * c;
            }
            let norm = v.norm();
            if norm > 1e-9 {
                v /= Complex64::new(norm, 0.0);
                normalize_sign(&mut v);
                kept.push(v);
            }
        }
        if kept.len() != 1 << k {
            return Err(Error::InvalidCode {
                reason: format!(
                    "projector rank {} does not give {} code words",
                    kept.len(),
                    1 << k
                ),
            });
        }
        Self::new(n, k, generators, kept)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn codewords(&self) -> &[DVector<Complex64>] {
        &self.codewords
    }

    pub fn syndrome_count(&self) -> usize {
        1 << (self.n - self.k)
    }

    /// Sign pattern of the commutation of `error` with each generator.
    pub fn syndrome_of(&self, error: &PauliOperator) -> Result<Syndrome> {
        if error.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: error.n(),
                right: self.n,
            });
        }
        let signs: Vec<i8> = self
            .generators
            .iter()
            .map(|g| if error.commutes(g).unwrap() { 1 } else { -1 })
            .collect();
        Syndrome::new(&signs)
    }

    /// All sign patterns in sorted order (trivial syndrome first).
    pub fn all_syndromes(&self) -> Vec<Syndrome> {
        let r = self.n - self.k;
        (0..1usize << r)
            .map(|bits| Syndrome {
                minus: (0..r).map(|i| bits >> (r - 1 - i) & 1 == 1).collect(),
            })
            .collect()
    }

    /// Π_C = Π_i (I + G_i)/2, the projector onto the code space.
    pub fn codespace_projector(&self) -> DMatrix<Complex64> {
        projector_of(&self.generators, self.n)
    }

    /// Projector onto the erroneous subspace labelled by a syndrome:
    /// Π_s = Π_i (I + s_i G_i)/2.
    pub fn syndrome_projector(&self, syndrome: &Syndrome) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut p = DMatrix::<Complex64>::identity(dim, dim);
        for (i, g) in self.generators.iter().enumerate() {
            let sign = Complex64::new(f64::from(syndrome.sign(i)), 0.0);
            let term = (DMatrix::<Complex64>::identity(dim, dim) + g.to_matrix() * sign)
                .scale(0.5);
            p *= term;
        }
        p
    }

    /// Brute-force enumeration of phase-0 Paulis commuting with every
    /// generator, in lexicographic letter order. Feasible for n ≤ 5.
    pub fn normalizer(&self) -> Result<Vec<PauliOperator>> {
        if self.n > 5 {
            return Err(Error::InvalidCode {
                reason: format!("normalizer enumeration is limited to n <= 5, code has n = {}", self.n),
            });
        }
        Ok(PauliOperator::all_phase0(self.n)
            .filter(|p| self.generators.iter().all(|g| p.commutes(g).unwrap()))
            .collect())
    }

    /// The stabilizer group as phase-0 letter strings (products of
    /// generators, discarding accumulated phases).
    pub fn stabilizer_elements(&self) -> Vec<PauliOperator> {
        let r = self.generators.len();
        let mut out = Vec::with_capacity(1 << r);
        for bits in 0..1usize << r {
            let mut acc = PauliOperator::identity(self.n).unwrap();
            for (i, g) in self.generators.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    acc = acc.multiply(g).unwrap();
                }
            }
            out.push(acc.phase0());
        }
        out.sort();
        out.dedup();
        out
    }

    /// Whether the full operator (letters and phase) lies in the group
    /// generated by the generators, i.e. equals some product of them
    /// including the accumulated phase.
    pub fn stabilizer_contains_with_phase(&self, op: &PauliOperator) -> bool {
        let r = self.generators.len();
        (0..1usize << r).any(|bits| {
            let mut acc = PauliOperator::identity(self.n).unwrap();
            for (i, g) in self.generators.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    acc = acc.multiply(g).unwrap();
                }
            }
            acc == *op
        })
    }

    /// Logical action of a normalizer element: the k-qubit phase-0 Pauli L
    /// and phase exponent q with ⟨i_L|N|j_L⟩ = i^q · matrix(L).
    pub fn logical_action(&self, op: &PauliOperator) -> Result<(PauliOperator, u8)> {
        if op.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: op.n(),
                right: self.n,
            });
        }
        if !self
            .generators
            .iter()
            .all(|g| op.phase0().commutes(g).unwrap())
        {
            return Err(Error::NotInNormalizer {
                operator: op.to_string(),
            });
        }
        let d = 1usize << self.k;
        let m = op.to_matrix();
        let mut action = DMatrix::<Complex64>::zeros(d, d);
        for j in 0..d {
            let image = &m * &self.codewords[j];
            for i in 0..d {
                action[(i, j)] = self.codewords[i].dotc(&image);
            }
        }
        for candidate in PauliOperator::all_phase0(self.k) {
            let cm = candidate.to_matrix();
            let (i0, j0) = match (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .find(|&(i, j)| cm[(i, j)].norm() > 0.5)
            {
                Some(pos) => pos,
                None => continue,
            };
            let ratio = action[(i0, j0)] / cm[(i0, j0)];
            for q in 0u8..4 {
                let phase = Complex64::new(0.0, 1.0).powu(u32::from(q));
                if (ratio - phase).norm() > ACTION_TOL {
                    continue;
                }
                let residual = (&action - cm.scale(1.0) * phase).camax();
                if residual <= ACTION_TOL {
                    return Ok((candidate, q));
                }
            }
        }
        Err(Error::NotInNormalizer {
            operator: op.to_string(),
        })
    }

    /// Σ_j α_j |j_L⟩ for unit-norm logical amplitudes.
    pub fn encode(&self, amplitudes: &[Complex64]) -> Result<DVector<Complex64>> {
        if amplitudes.len() != 1 << self.k {
            return Err(Error::MalformedInput {
                what: "logical state".into(),
                reason: format!(
                    "expected {} amplitudes, got {}",
                    1 << self.k,
                    amplitudes.len()
                ),
            });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > ORTHO_TOL {
            return Err(Error::MalformedInput {
                what: "logical state".into(),
                reason: format!("norm^2 = {norm2} is not 1"),
            });
        }
        let mut out = DVector::<Complex64>::zeros(1 << self.n);
        for (a, w) in amplitudes.iter().zip(&self.codewords) {
            out += w * *a;
        }
        Ok(out)
    }

    /// Logical amplitudes α_j = ⟨j_L|ψ⟩ of an encoded state.
    pub fn decode(&self, state: &DVector<Complex64>) -> Result<Vec<Complex64>> {
        if state.len() != 1 << self.n {
            return Err(Error::DimensionMismatch {
                left: state.len(),
                right: 1 << self.n,
            });
        }
        let amps: Vec<Complex64> = self.codewords.iter().map(|w| w.dotc(state)).collect();
        let inside: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (inside - state.norm_squared()).abs() > 1e-9 {
            return Err(Error::MalformedInput {
                what: "encoded state".into(),
                reason: "state has support outside the code space".into(),
            });
        }
        Ok(amps)
    }

    /// (⟨X_L⟩, ⟨Y_L⟩, ⟨Z_L⟩) of an encoded state; k = 1 only.
    pub fn logical_expectations(&self, state: &DVector<Complex64>) -> Result<[f64; 3]> {
        if self.k != 1 {
            return Err(Error::MalformedInput {
                what: "logical expectations".into(),
                reason: format!("defined for k = 1 codes, this code has k = {}", self.k),
            });
        }
        let amps = self.decode(state)?;
        let (a0, a1) = (amps[0], amps[1]);
        let cross = a0.conj() * a1;
        Ok([2.0 * cross.re, 2.0 * cross.im, a0.norm_sqr() - a1.norm_sqr()])
    }

    /// Text form: header "n k", one generator per line, then one block per
    /// code word ("codeword j" followed by "index re im" lines).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.k);
        for g in &self.generators {
            out.push_str(&format!("{g}\n"));
        }
        for (j, w) in self.codewords.iter().enumerate() {
            out.push_str(&format!("codeword {j}\n"));
            for (i, a) in w.iter().enumerate() {
                if a.norm() > 0.0 {
                    out.push_str(&format!("{i} {:.17e} {:.17e}\n", a.re, a.im));
                }
            }
        }
        out
    }

    /// Parses the text form; codes without code-word blocks get a
    /// projector-derived basis.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedInput {
            what: "code file".into(),
            reason: "missing header line".into(),
        })?;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), "n")?;
        let k: usize = parse_field(parts.next(), "k")?;
        if k >= n {
            return Err(Error::InvalidCode {
                reason: format!("k = {k} must be smaller than n = {n}"),
            });
        }
        let mut generators = Vec::with_capacity(n - k);
        for _ in 0..n - k {
            let line = lines.next().ok_or_else(|| Error::MalformedInput {
                what: "code file".into(),
                reason: "missing generator line".into(),
            })?;
            generators.push(PauliOperator::parse(line.trim(), n)?);
        }
        let rest: Vec<&str> = lines.collect();
        if rest.is_empty() {
            return Self::from_generators(n, k, generators);
        }
        let mut codewords = vec![DVector::<Complex64>::zeros(1 << n); 1 << k];
        let mut current: Option<usize> = None;
        for line in rest {
            let line = line.trim();
            if let Some(tag) = line.strip_prefix("codeword") {
                let j: usize = tag.trim().parse().map_err(|_| Error::MalformedInput {
                    what: "code file".into(),
                    reason: format!("bad codeword header {line:?}"),
                })?;
                if j >= 1 << k {
                    return Err(Error::MalformedInput {
                        what: "code file".into(),
                        reason: format!("codeword index {j} out of range"),
                    });
                }
                current = Some(j);
            } else {
                let j = current.ok_or_else(|| Error::MalformedInput {
                    what: "code file".into(),
                    reason: "amplitude line before any codeword header".into(),
                })?;
                let mut fields = line.split_whitespace();
                let i: usize = parse_field(fields.next(), "amplitude index")?;
                let re: f64 = parse_field(fields.next(), "amplitude re")?;
                let im: f64 = parse_field(fields.next(), "amplitude im")?;
                if i >= 1 << n {
                    return Err(Error::MalformedInput {
                        what: "code file".into(),
                        reason: format!("amplitude index {i} out of range"),
                    });
                }
                codewords[j][i] = Complex64::new(re, im);
            }
        }
        Self::new(n, k, generators, codewords)
    }
}

impl fmt::Debug for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StabilizerCode")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("generators", &self.generators)
            .finish_non_exhaustive()
    }
}

fn parse_field<T: FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::MalformedInput {
            what: "code file".into(),
            reason: format!("missing {what}"),
        })?
        .parse()
        .map_err(|_| Error::MalformedInput {
            what: "code file".into(),
            reason: format!("bad {what}"),
        })
}

fn check_generators(n: usize, k: usize, generators: &[PauliOperator]) -> Result<()> {
    if n == 0 || n > crate::pauli::MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange { n });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidCode {
            reason: format!("k = {k} must satisfy 1 <= k < n"),
        });
    }
    if generators.len() != n - k {
        return Err(Error::InvalidCode {
            reason: format!("expected {} generators, got {}", n - k, generators.len()),
        });
    }
    for g in generators {
        if g.n() != n {
            return Err(Error::DimensionMismatch {
                left: g.n(),
                right: n,
            });
        }
        if g.phase_exp() % 2 != 0 {
            return Err(Error::InvalidCode {
                reason: format!("generator {g} is not Hermitian"),
            });
        }
    }
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            if !generators[i].commutes(&generators[j]).unwrap() {
                return Err(Error::InvalidCode {
                    reason: format!(
                        "generators {} and {} anticommute",
                        generators[i], generators[j]
                    ),
                });
            }
        }
    }
    // independence over GF(2): symplectic rows must have full rank
    let mut rows: Vec<u16> = generators
        .iter()
        .map(|g| u16::from(g.x_bits()) | u16::from(g.z_bits()) << 8)
        .collect();
    let mut rank = 0;
    for bit in 0..16 {
        if let Some(pos) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
            rows.swap(rank, pos);
            for r in 0..rows.len() {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    if rank != generators.len() {
        return Err(Error::InvalidCode {
            reason: "generators are not independent".into(),
        });
    }
    Ok(())
}

fn projector_of(generators: &[PauliOperator], n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut p = DMatrix::<Complex64>::identity(dim, dim);
    for g in generators {
        let term = (DMatrix::<Complex64>::identity(dim, dim) + g.to_matrix()).scale(0.5);
        p *= term;
    }
    p
}

fn normalize_sign(v: &mut DVector<Complex64>) {
    if let Some(first) = v.iter().find(|a| a.norm() > 1e-9) {
        let phase = first.conj() / first.norm();
        *v *= phase;
    }
}

/// Formats a logical action as a signed class label such as "-X_L" or "iY_L".
pub fn format_logical(logical: &PauliOperator, phase_exp: u8) -> String {
    let prefix = match phase_exp {
        1 => "i",
        2 => "-",
        3 => "-i",
        _ => "",
    };
    format!("{prefix}{logical}_L")
}

/// The phase-free normalizer grouped by logical class (cosets of the
/// stabilizer with phases quotiented out), each labelled with the signed
/// action of its smallest element.  Individual elements inside a coset can
/// differ from the label by a sign.
pub fn normalizer_classes(
    code: &StabilizerCode,
) -> Result<Vec<(String, Vec<PauliOperator>)>> {
    let mut classes: BTreeMap<usize, Vec<PauliOperator>> = BTreeMap::new();
    for op in code.normalizer()? {
        let (logical, _) = code.logical_action(&op)?;
        classes.entry(logical.basis_index()).or_default().push(op);
    }
    let mut grouped = Vec::new();
    for (_, mut elements) in classes {
        elements.sort_by_key(|op| (op.weight(), op.to_string()));
        let (logical, phase_exp) = code.logical_action(&elements[0])?;
        grouped.push((format_logical(&logical, phase_exp), elements));
    }
    Ok(grouped)
}

/// Renders the normalizer classes as fixed-width columns.
pub fn render_normalizer_table(code: &StabilizerCode) -> Result<String> {
    let mut headers = Vec::new();
    let mut columns = Vec::new();
    for (label, elements) in normalizer_classes(code)? {
        headers.push(label);
        columns.push(elements);
    }
    let depth = columns.iter().map(Vec::len).max().unwrap_or(0);
    let width = headers
        .iter()
        .map(String::len)
        .chain(columns.iter().flatten().map(|op| op.to_string().len()))
        .max()
        .unwrap_or(0)
        + 2;
    let mut out = String::new();
    for header in &headers {
        out.push_str(&format!("{header:<width$}"));
    }
    out.push('\n');
    for r in 0..depth {
        for column in &columns {
            let cell = column
                .get(r)
                .map(|op| op.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{cell:<width$}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn amp(entries: &[(usize, f64)], dim: usize) -> DVector<Complex64> {
        let mut v = DVector::<Complex64>::zeros(dim);
        for &(i, a) in entries {
            v[i] = Complex64::new(a, 0.0);
        }
        v
    }

    /// [[3,1]] code with generators XIX, YYZ and its catalogued code words.
    pub(crate) fn q3() -> StabilizerCode {
        let zero = amp(&[(1, 0.5), (2, 0.5), (4, 0.5), (7, 0.5)], 8);
        let one = amp(&[(0, -0.5), (3, 0.5), (5, -0.5), (6, 0.5)], 8);
        StabilizerCode::new(3, 1, vec![op("XIX"), op("YYZ")], vec![zero, one]).unwrap()
    }

    #[test]
    fn syndromes_match_reference_columns() {
        let code = q3();
        assert_eq!(code.syndrome_of(&op("III")).unwrap().to_string(), "++");
        assert_eq!(code.syndrome_of(&op("XII")).unwrap().to_string(), "+-");
        assert_eq!(code.syndrome_of(&op("YII")).unwrap().to_string(), "-+");
        assert_eq!(code.syndrome_of(&op("ZII")).unwrap().to_string(), "--");
    }

    #[test]
    fn syndrome_of_product_multiplies_signs() {
        let code = q3();
        // exhaustive over 2-coordinate errors
        for a in PauliOperator::all_phase0(2) {
            for b in PauliOperator::all_phase0(2) {
                let ea = a.embed(3, &[0, 1]).unwrap();
                let eb = b.embed(3, &[0, 1]).unwrap();
                let prod = ea.multiply(&eb).unwrap();
                let expect = code
                    .syndrome_of(&ea)
                    .unwrap()
                    .product(&code.syndrome_of(&eb).unwrap())
                    .unwrap();
                assert_eq!(code.syndrome_of(&prod).unwrap(), expect);
            }
        }
    }

    #[test]
    fn projector_is_rank_two_and_fixes_codewords() {
        let code = q3();
        let p = code.codespace_projector();
        let trace: Complex64 = (0..8).map(|i| p[(i, i)]).sum();
        assert!((trace - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(((&p * &p) - &p).camax() < 1e-12);
        assert!((&p - p.adjoint()).camax() < 1e-12);
        for w in code.codewords() {
            assert!((&p * w - w).camax() < 1e-12);
        }
    }

    #[test]
    fn normalizer_has_sixteen_elements_including_stabilizer() {
        let code = q3();
        let nor = code.normalizer().unwrap();
        assert_eq!(nor.len(), 16);
        for s in code.stabilizer_elements() {
            assert!(nor.contains(&s));
        }
    }

    #[test]
    fn logical_actions_match_reference_classes() {
        let code = q3();
        let (l, q) = code.logical_action(&op("XZI")).unwrap();
        assert_eq!((l.to_string().as_str(), q), ("X", 2));
        let (l, q) = code.logical_action(&op("IYI")).unwrap();
        assert_eq!((l.to_string().as_str(), q), ("Y", 0));
        for s in code.stabilizer_elements() {
            let (l, q) = code.logical_action(&s).unwrap();
            assert!(l.is_identity());
            assert_eq!(q, 0);
        }
        assert!(code.logical_action(&op("ZII")).is_err());
    }

    #[test]
    fn encode_and_expectations() {
        let code = q3();
        let one = Complex64::new(1.0, 0.0);
        let zero_l = code.encode(&[one, Complex64::ZERO]).unwrap();
        assert_eq!(zero_l, code.codewords()[0]);
        assert_eq!(code.logical_expectations(&zero_l).unwrap(), [0.0, 0.0, 1.0]);

        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = code.encode(&[s, s]).unwrap();
        let [x, y, z] = code.logical_expectations(&plus).unwrap();
        assert!((x - 1.0).abs() < 1e-12 && y.abs() < 1e-12 && z.abs() < 1e-12);

        let up = code
            .encode(&[s, Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)])
            .unwrap();
        let [x, y, z] = code.logical_expectations(&up).unwrap();
        assert!(x.abs() < 1e-12 && (y - 1.0).abs() < 1e-12 && z.abs() < 1e-12);

        let theta = 0.3f64;
        let rotated = code
            .encode(&[
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(theta.sin(), 0.0),
            ])
            .unwrap();
        let [x, y, z] = code.logical_expectations(&rotated).unwrap();
        assert!((x - (2.0 * theta).sin()).abs() < 1e-12);
        assert!(y.abs() < 1e-12);
        assert!((z - (2.0 * theta).cos()).abs() < 1e-12);

        assert!(code.encode(&[one, one]).is_err());
    }

    #[test]
    fn decode_rejects_states_outside_the_code_space() {
        let code = q3();
        let mut v = DVector::<Complex64>::zeros(8);
        v[0] = Complex64::new(1.0, 0.0);
        assert!(code.decode(&v).is_err());
    }

    #[test]
    fn generator_basis_spans_the_same_space_as_listed_kets() {
        let listed = q3();
        let derived =
            StabilizerCode::from_generators(3, 1, vec![op("XIX"), op("YYZ")]).unwrap();
        let p = listed.codespace_projector();
        for w in derived.codewords() {
            assert!((&p * w - w).camax() < 1e-9);
        }
    }

    #[test]
    fn text_round_trip() {
        let code = q3();
        let text = code.to_text();
        let back = StabilizerCode::from_text(&text).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.k(), 1);
        assert_eq!(back.generators(), code.generators());
        for (a, b) in back.codewords().iter().zip(code.codewords()) {
            assert!((a - b).camax() < 1e-15);
        }
        let bare = "3 1\nXIX\nYYZ\n";
        let derived = StabilizerCode::from_text(bare).unwrap();
        assert_eq!(derived.generators(), code.generators());
        assert!(StabilizerCode::from_text("3 1\nXIX\n").is_err());
        assert!(StabilizerCode::from_text("3 1\nXIX\nXIZ\n").is_err());
    }

    #[test]
    fn syndrome_ordering_puts_plus_first() {
        let a: Syndrome = "++".parse().unwrap();
        let b: Syndrome = "+-".parse().unwrap();
        let c: Syndrome = "-+".parse().unwrap();
        assert!(a < b && b < c);
        let code = q3();
        let all = code.all_syndromes();
        let strings: Vec<String> = all.iter().map(|s| s.to_string()).collect();
        assert_eq!(strings, ["++", "+-", "-+", "--"]);
    }

    #[test]
    fn rejects_bad_generator_sets() {
        assert!(StabilizerCode::from_generators(3, 1, vec![op("XII"), op("ZII")]).is_err());
        assert!(StabilizerCode::from_generators(3, 1, vec![op("XIX"), op("XIX")]).is_err());
    }
}
