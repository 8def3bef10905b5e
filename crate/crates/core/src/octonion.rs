//! Octonion (Cayley number) arithmetic over the canonical basis `{1, e0, ..., e6}`.
//!
//! The imaginary units satisfy `e_i e_{i+1} = e_{i+3}` (indices mod 7). Every other
//! product is fixed by reading each triple `(i, i+1, i+3)` cyclically and by
//! anticommutation of distinct imaginary units.
//!
//! Coefficients are stored as `[unit, e0, e1, ..., e6]`, so basis slot `k + 1`
//! holds the imaginary unit `e_k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use thiserror::Error;

/// Real dimension of the algebra.
pub const DIM: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("line {line}: expected 8 entries, found {found}")]
    RowLength { line: usize, found: usize },
    #[error("expected 8 rows, found {0}")]
    RowCount(usize),
    #[error("line {line}: cannot parse entry `{token}`")]
    BadEntry { line: usize, token: String },
}

/// A basis element with a sign, `sign * b_index` where `b_0 = 1` and `b_{k+1} = e_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedIndex {
    pub sign: i8,
    pub index: u8,
}

impl SignedIndex {
    pub const fn new(sign: i8, index: u8) -> Self {
        Self { sign, index }
    }
}

impl fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { '-' } else { '+' };
        write!(f, "{s}{}", self.index)
    }
}

/// Products of ordered basis pairs, including the unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicationTable {
    entries: [[SignedIndex; DIM]; DIM],
}

/// The seven triples `(i, i+1, i+3) mod 7` of imaginary indices.
pub const fn fano_triples() -> [[usize; 3]; 7] {
    let mut out = [[0usize; 3]; 7];
    let mut i = 0;
    while i < 7 {
        out[i] = [i, (i + 1) % 7, (i + 3) % 7];
        i += 1;
    }
    out
}

const fn generate_canonical() -> [[SignedIndex; DIM]; DIM] {
    let mut t = [[SignedIndex::new(0, 0); DIM]; DIM];
    let mut i = 0;
    while i < DIM {
        t[0][i] = SignedIndex::new(1, i as u8);
        t[i][0] = SignedIndex::new(1, i as u8);
        i += 1;
    }
    let mut k = 1;
    while k < DIM {
        t[k][k] = SignedIndex::new(-1, 0);
        k += 1;
    }
    let triples = fano_triples();
    let mut n = 0;
    while n < 7 {
        let [a, b, c] = triples[n];
        // e_a e_b = e_c, e_b e_c = e_a, e_c e_a = e_b, and the reversed orders flip sign.
        let cyc = [[a, b, c], [b, c, a], [c, a, b]];
        let mut m = 0;
        while m < 3 {
            let [x, y, z] = cyc[m];
            t[x + 1][y + 1] = SignedIndex::new(1, (z + 1) as u8);
            t[y + 1][x + 1] = SignedIndex::new(-1, (z + 1) as u8);
            m += 1;
        }
        n += 1;
    }
    t
}

static CANONICAL: MultiplicationTable = MultiplicationTable {
    entries: generate_canonical(),
};

impl MultiplicationTable {
    pub fn canonical() -> &'static MultiplicationTable {
        &CANONICAL
    }

    pub fn from_entries(entries: [[SignedIndex; DIM]; DIM]) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[[SignedIndex; DIM]; DIM] {
        &self.entries
    }

    #[inline]
    pub fn product(&self, i: usize, j: usize) -> SignedIndex {
        self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: SignedIndex) {
        self.entries[i][j] = value;
    }

    /// Bilinear extension of the table.
    pub fn mul(&self, a: &Octonion, b: &Octonion) -> Octonion {
        let mut out = [0.0; DIM];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (j, &bj) in b.coeffs.iter().enumerate() {
                let e = self.entries[i][j];
                out[e.index as usize] += f64::from(e.sign) * ai * bj;
            }
        }
        Octonion { coeffs: out }
    }

    /// Entry-by-entry violations of the unit, square and anticommutation rules.
    ///
    /// Returns human-readable descriptions; an empty list means the table is
    /// structurally sound.
    pub fn structural_defects(&self) -> Vec<String> {
        let mut defects = Vec::new();
        for i in 0..DIM {
            if self.entries[0][i] != SignedIndex::new(1, i as u8)
                || self.entries[i][0] != SignedIndex::new(1, i as u8)
            {
                defects.push(format!("unit row/column broken at {i}"));
            }
        }
        for i in 1..DIM {
            if self.entries[i][i] != SignedIndex::new(-1, 0) {
                defects.push(format!("e{}^2 != -1", i - 1));
            }
            for j in 1..DIM {
                if i == j {
                    continue;
                }
                let p = self.entries[i][j];
                let q = self.entries[j][i];
                if p.index == 0 || p.sign == 0 || p.sign.abs() != 1 {
                    defects.push(format!("e{} e{} is not an imaginary unit", i - 1, j - 1));
                }
                if p.index != q.index || p.sign != -q.sign {
                    defects.push(format!("e{} e{} != -e{} e{}", i - 1, j - 1, j - 1, i - 1));
                }
            }
        }
        defects
    }

    /// Eight whitespace-separated signed indices per row, e.g. `+3` or `-0`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# octonion multiplication table: row i, column j = b_i b_j\n");
        for row in &self.entries {
            let line: Vec<String> = row.iter().map(ToString::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut entries = [[SignedIndex::new(0, 0); DIM]; DIM];
        let mut row = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if row >= DIM {
                return Err(TableError::RowCount(row + 1));
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != DIM {
                return Err(TableError::RowLength {
                    line: lineno + 1,
                    found: tokens.len(),
                });
            }
            for (col, tok) in tokens.iter().enumerate() {
                let bad = || TableError::BadEntry {
                    line: lineno + 1,
                    token: (*tok).to_string(),
                };
                let (sign, digits) = match tok.as_bytes().first() {
                    Some(b'-') => (-1, &tok[1..]),
                    Some(b'+') => (1, &tok[1..]),
                    _ => (1, *tok),
                };
                let index: u8 = digits.parse().map_err(|_| bad())?;
                if index as usize >= DIM {
                    return Err(bad());
                }
                entries[row][col] = SignedIndex::new(sign, index);
            }
            row += 1;
        }
        if row != DIM {
            return Err(TableError::RowCount(row));
        }
        Ok(Self { entries })
    }
}

/// An element `α·1 + Σ a_k e_k` of the Cayley algebra.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Octonion {
    pub coeffs: [f64; DIM],
}

impl Octonion {
    pub const ZERO: Octonion = Octonion { coeffs: [0.0; DIM] };
    pub const ONE: Octonion = Octonion {
        coeffs: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    };

    pub const fn new(coeffs: [f64; DIM]) -> Self {
        Self { coeffs }
    }

    pub fn real(alpha: f64) -> Self {
        let mut coeffs = [0.0; DIM];
        coeffs[0] = alpha;
        Self { coeffs }
    }

    /// Basis element `b_slot`: slot 0 is the unit, slot `k + 1` is `e_k`.
    pub fn basis(slot: usize) -> Self {
        assert!(slot < DIM, "basis slot out of range");
        let mut coeffs = [0.0; DIM];
        coeffs[slot] = 1.0;
        Self { coeffs }
    }

    /// Imaginary unit `e_k`, `0 <= k < 7`.
    pub fn e(k: usize) -> Self {
        Self::basis(k + 1)
    }

    /// Uniform coefficients in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut coeffs = [0.0; DIM];
        for c in &mut coeffs {
            *c = rng.gen_range(-1.0..=1.0);
        }
        Self { coeffs }
    }

    pub fn re(&self) -> f64 {
        self.coeffs[0]
    }

    /// Imaginary part, orthogonal to 1.
    pub fn im(&self) -> Self {
        let mut c = self.coeffs;
        c[0] = 0.0;
        Self { coeffs: c }
    }

    pub fn conj(&self) -> Self {
        let mut c = self.coeffs.map(|x| -x);
        c[0] = self.coeffs[0];
        Self { coeffs: c }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.map(|x| x * s),
        }
    }

    /// Product under an explicit table; `*` uses the canonical one.
    pub fn mul_with(&self, other: &Self, table: &MultiplicationTable) -> Self {
        table.mul(self, other)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.coeffs;
        for (x, y) in c.iter_mut().zip(rhs.coeffs) {
            *x += y;
        }
        Octonion { coeffs: c }
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.coeffs;
        for (x, y) in c.iter_mut().zip(rhs.coeffs) {
            *x -= y;
        }
        Octonion { coeffs: c }
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Self) -> Self {
        CANONICAL.mul(&self, &rhs)
    }
}

impl Mul<f64> for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// A tangent vector of the Cayley plane, an element of `O² ≅ R¹⁶`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OctPair {
    pub x: Octonion,
    pub y: Octonion,
}

impl OctPair {
    pub fn new(x: Octonion, y: Octonion) -> Self {
        Self { x, y }
    }

    pub fn from_array(v: &[f64; 16]) -> Self {
        let mut x = [0.0; DIM];
        let mut y = [0.0; DIM];
        x.copy_from_slice(&v[..DIM]);
        y.copy_from_slice(&v[DIM..]);
        Self {
            x: Octonion::new(x),
            y: Octonion::new(y),
        }
    }

    pub fn to_array(&self) -> [f64; 16] {
        let mut v = [0.0; 16];
        v[..DIM].copy_from_slice(&self.x.coeffs);
        v[DIM..].copy_from_slice(&self.y.coeffs);
        v
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generating_rule() {
        for i in 0..7 {
            assert_eq!(Octonion::e(i) * Octonion::e((i + 1) % 7), Octonion::e((i + 3) % 7));
        }
        assert_eq!(Octonion::e(0) * Octonion::e(1), Octonion::e(3));
    }

    #[test]
    fn non_associativity_witness() {
        let (e0, e1, e2) = (Octonion::e(0), Octonion::e(1), Octonion::e(2));
        assert_eq!((e0 * e1) * e2, -Octonion::e(5));
        assert_eq!(e0 * (e1 * e2), Octonion::e(5));
    }

    #[test]
    fn canonical_table_is_sound() {
        assert!(MultiplicationTable::canonical().structural_defects().is_empty());
    }

    #[test]
    fn inner_is_kronecker_on_basis() {
        for i in 0..DIM {
            for j in 0..DIM {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(Octonion::basis(i).inner(&Octonion::basis(j)), expected);
            }
        }
    }

    #[test]
    fn conjugation_basics() {
        assert_eq!(Octonion::ONE.conj(), Octonion::ONE);
        assert_eq!(Octonion::e(0).conj(), -Octonion::e(0));
    }

    #[test]
    fn identity_and_conjugate_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = Octonion::random(&mut rng);
            assert!((Octonion::ONE * a).max_abs_diff(&a) == 0.0);
            let aa = a * a.conj();
            assert!(aa.max_abs_diff(&Octonion::real(a.norm_sqr())) < 1e-14);
        }
    }

    #[test]
    fn table_text_roundtrip_and_corruption() {
        let t = MultiplicationTable::canonical();
        let parsed = MultiplicationTable::parse(&t.to_text()).unwrap();
        assert_eq!(&parsed, t);

        let mut bad = t.clone();
        bad.set(1, 2, SignedIndex::new(-1, 4));
        assert!(!bad.structural_defects().is_empty());
    }

    #[test]
    fn table_parse_errors() {
        assert!(matches!(
            MultiplicationTable::parse("+0 +1\n"),
            Err(TableError::RowLength { line: 1, found: 2 })
        ));
        assert!(matches!(MultiplicationTable::parse(""), Err(TableError::RowCount(0))));
        let mut text = MultiplicationTable::canonical().to_text();
        text = text.replacen("+3", "+9", 1);
        assert!(matches!(
            MultiplicationTable::parse(&text),
            Err(TableError::BadEntry { .. })
        ));
    }

    #[test]
    fn pair_inner_is_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = OctPair::new(Octonion::random(&mut rng), Octonion::random(&mut rng));
        let q = OctPair::new(Octonion::random(&mut rng), Octonion::random(&mut rng));
        let direct: f64 = p.to_array().iter().zip(q.to_array()).map(|(a, b)| a * b).sum();
        assert!((p.inner(&q) - direct).abs() < 1e-15);
        assert_eq!(OctPair::from_array(&p.to_array()), p);
    }
}
