//! Outer analog Steane layer: syndrome matrices, ancilla couplings, the
//! unit-error signature table and the quadrature encoding map.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::phase_space::{DisplacementState, Quadrature, CODE_SIZE};

pub const SYNDROMES_PER_QUADRATURE: usize = 3;
pub const ANCILLA_TERMS: usize = 6;

pub type IntMatrix<const C: usize> = [[i64; C]; SYNDROMES_PER_QUADRATURE];

/// Linear maps from per-qumode errors (and ancilla noise) to syndromes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeModel {
    pub m_x: IntMatrix<CODE_SIZE>,
    pub m_p: IntMatrix<CODE_SIZE>,
    pub a_x: IntMatrix<ANCILLA_TERMS>,
    pub a_p: IntMatrix<ANCILLA_TERMS>,
}

impl Default for SyndromeModel {
    fn default() -> Self {
        Self::standard()
    }
}

impl SyndromeModel {
    pub fn standard() -> Self {
        // s1..s3 on ε_x1..ε_x7
        let m_x = [
            [-1, 1, 0, 0, -1, -1, -2],
            [-1, 0, 1, 0, -1, -2, -1],
            [0, 0, 0, 1, -1, -1, -1],
        ];
        // s4..s6 on ε_p1..ε_p7
        let m_p = [
            [0, -1, -1, -1, -1, 0, 0],
            [1, 0, -1, -1, 0, -1, 0],
            [1, -1, 0, -1, 0, 0, -1],
        ];
        // each syndrome sees one data-mode quadrature and one readout ancilla
        let a = [
            [1, 0, 0, 1, 0, 0],
            [0, 1, 0, 0, 1, 0],
            [0, 0, 1, 0, 0, 1],
        ];
        Self { m_x, m_p, a_x: a, a_p: a }
    }

    pub fn signature(&self, q: Quadrature) -> &IntMatrix<CODE_SIZE> {
        match q {
            Quadrature::X => &self.m_x,
            Quadrature::P => &self.m_p,
        }
    }

    pub fn ancilla(&self, q: Quadrature) -> &IntMatrix<ANCILLA_TERMS> {
        match q {
            Quadrature::X => &self.a_x,
            Quadrature::P => &self.a_p,
        }
    }

    /// Column `m_j` for a 1-based qumode index.
    pub fn column(&self, q: Quadrature, qumode: usize) -> Result<[i64; 3]> {
        let j = qumode_index(qumode)?;
        Ok(self.column0(q, j))
    }

    pub(crate) fn column0(&self, q: Quadrature, j: usize) -> [i64; 3] {
        let m = self.signature(q);
        [m[0][j], m[1][j], m[2][j]]
    }

    pub fn gram(&self, q: Quadrature) -> [[i64; 3]; 3] {
        let m = self.signature(q);
        gram_of(m)
    }

    pub fn ancilla_gram(&self, q: Quadrature) -> [[i64; 3]; 3] {
        gram_of(self.ancilla(q))
    }

    /// True iff no two signature columns are parallel (every single-qumode
    /// displacement is distinguishable from every other).
    pub fn columns_distinguishable(&self, q: Quadrature) -> bool {
        (0..CODE_SIZE).all(|j| {
            (j + 1..CODE_SIZE).all(|k| {
                let a = self.column0(q, j);
                let b = self.column0(q, k);
                let cross = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                cross != [0, 0, 0]
            })
        })
    }
}

fn gram_of<const C: usize>(m: &IntMatrix<C>) -> [[i64; 3]; 3] {
    let mut g = [[0i64; 3]; 3];
    for (a, row) in g.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..C).map(|c| m[a][c] * m[b][c]).sum();
        }
    }
    g
}

/// Converts a 1-based qumode number to an array index.
pub fn qumode_index(qumode: usize) -> Result<usize> {
    if (1..=CODE_SIZE).contains(&qumode) {
        Ok(qumode - 1)
    } else {
        Err(invalid(format!("qumode index must be in 1..={CODE_SIZE}, got {qumode}")))
    }
}

/// Per-qumode displacement errors, stored quadrature-separated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorVector {
    pub eps_x: [f64; CODE_SIZE],
    pub eps_p: [f64; CODE_SIZE],
}

impl ErrorVector {
    pub fn unit(q: Quadrature, qumode: usize) -> Result<Self> {
        let j = qumode_index(qumode)?;
        let mut e = Self::default();
        match q {
            Quadrature::X => e.eps_x[j] = 1.0,
            Quadrature::P => e.eps_p[j] = 1.0,
        }
        Ok(e)
    }

    /// `[ε_x1, ε_p1, ε_x2, ε_p2, …, ε_x7, ε_p7]`.
    pub fn to_interleaved(&self) -> [f64; 2 * CODE_SIZE] {
        let mut out = [0.0; 2 * CODE_SIZE];
        for j in 0..CODE_SIZE {
            out[2 * j] = self.eps_x[j];
            out[2 * j + 1] = self.eps_p[j];
        }
        out
    }

    pub fn from_interleaved(v: &[f64; 2 * CODE_SIZE]) -> Result<Self> {
        let mut e = Self::default();
        for j in 0..CODE_SIZE {
            ensure_finite("error entry", v[2 * j])?;
            ensure_finite("error entry", v[2 * j + 1])?;
            e.eps_x[j] = v[2 * j];
            e.eps_p[j] = v[2 * j + 1];
        }
        Ok(e)
    }

    pub fn quadrature(&self, q: Quadrature) -> &[f64; CODE_SIZE] {
        match q {
            Quadrature::X => &self.eps_x,
            Quadrature::P => &self.eps_p,
        }
    }
}

/// A single large displacement `d` on one qumode (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbruptError {
    pub qumode: usize,
    pub magnitude: f64,
}

/// `s = M ε + d m_j + A n` for one quadrature.
pub fn compute_syndrome(
    model: &SyndromeModel,
    q: Quadrature,
    eps: &[f64; CODE_SIZE],
    abrupt: Option<AbruptError>,
    ancilla_noise: Option<&[f64; ANCILLA_TERMS]>,
) -> Result<[f64; 3]> {
    for &e in eps {
        ensure_finite("error entry", e)?;
    }
    let mut s = syndrome_unchecked(model.signature(q), eps);
    if let Some(AbruptError { qumode, magnitude }) = abrupt {
        ensure_finite("abrupt magnitude", magnitude)?;
        let col = model.column(q, qumode)?;
        for (si, &c) in s.iter_mut().zip(col.iter()) {
            *si += magnitude * c as f64;
        }
    }
    if let Some(noise) = ancilla_noise {
        let a = model.ancilla(q);
        for (r, si) in s.iter_mut().enumerate() {
            *si += a[r].iter().zip(noise.iter()).map(|(&c, &n)| c as f64 * n).sum::<f64>();
        }
    }
    Ok(s)
}

#[inline]
pub(crate) fn syndrome_unchecked(m: &IntMatrix<CODE_SIZE>, eps: &[f64; CODE_SIZE]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for (si, row) in s.iter_mut().zip(m.iter()) {
        *si = row.iter().zip(eps.iter()).map(|(&c, &e)| c as f64 * e).sum();
    }
    s
}

pub fn compute_syndrome_x(
    model: &SyndromeModel,
    eps_res_x: &[f64; CODE_SIZE],
    abrupt: Option<AbruptError>,
    ancilla_noise: Option<&[f64; ANCILLA_TERMS]>,
) -> Result<[f64; 3]> {
    compute_syndrome(model, Quadrature::X, eps_res_x, abrupt, ancilla_noise)
}

pub fn compute_syndrome_p(
    model: &SyndromeModel,
    eps_res_p: &[f64; CODE_SIZE],
    abrupt: Option<AbruptError>,
    ancilla_noise: Option<&[f64; ANCILLA_TERMS]>,
) -> Result<[f64; 3]> {
    compute_syndrome(model, Quadrature::P, eps_res_p, abrupt, ancilla_noise)
}

/// One row of the unit-error signature table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureRow {
    pub quadrature: Quadrature,
    pub qumode: usize,
    /// `s1..s6`: three position syndromes followed by three momentum syndromes.
    pub syndromes: [i64; 6],
}

impl SignatureRow {
    pub fn label(&self) -> String {
        format!("eps_{}{}", self.quadrature, self.qumode)
    }
}

/// Syndromes for every unit error, ordered `ε_x1 … ε_x7, ε_p1 … ε_p7`.
pub fn syndrome_table(model: &SyndromeModel) -> Vec<SignatureRow> {
    let mut rows = Vec::with_capacity(2 * CODE_SIZE);
    for q in Quadrature::BOTH {
        for j in 0..CODE_SIZE {
            let col = model.column0(q, j);
            let mut syndromes = [0i64; 6];
            let offset = match q {
                Quadrature::X => 0,
                Quadrature::P => 3,
            };
            syndromes[offset..offset + 3].copy_from_slice(&col);
            rows.push(SignatureRow { quadrature: q, qumode: j + 1, syndromes });
        }
    }
    rows
}

/// Displacement gate: subtracts `amount` from one quadrature of one qumode.
pub fn apply_correction(
    state: &DisplacementState,
    q: Quadrature,
    qumode: usize,
    amount: f64,
) -> Result<DisplacementState> {
    let j = qumode_index(qumode)?;
    ensure_finite("correction amount", amount)?;
    let mut out = *state;
    out.quadrature_mut(q)[j] -= amount;
    Ok(out)
}

const PHASE_DIM: usize = 2 * CODE_SIZE;

/// Integer map from initial quadratures `(x1, p1, …, x7, p7)` to encoded ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMatrix {
    pub s: [[i64; PHASE_DIM]; PHASE_DIM],
}

fn xi(k: usize) -> usize {
    2 * (k - 1)
}

fn pi(k: usize) -> usize {
    2 * (k - 1) + 1
}

impl EncodingMatrix {
    pub fn identity() -> Self {
        let mut s = [[0i64; PHASE_DIM]; PHASE_DIM];
        for (i, row) in s.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self { s }
    }

    /// The encoded quadratures of the seven-mode analog Steane circuit.
    pub fn steane() -> Self {
        let mut s = [[0i64; PHASE_DIM]; PHASE_DIM];
        let mut set = |row: usize, terms: &[(usize, i64)]| {
            for &(col, c) in terms {
                s[row][col] += c;
            }
        };
        set(xi(1), &[(pi(6), -1), (pi(7), -1), (xi(1), 1)]);
        set(pi(1), &[(pi(1), 1), (pi(2), -1), (pi(3), -1)]);
        set(xi(2), &[(pi(5), 1), (pi(7), 1), (xi(1), 1), (xi(2), 1)]);
        set(pi(2), &[(pi(2), 1)]);
        set(xi(3), &[(pi(5), 1), (pi(6), 1), (xi(1), 1), (xi(3), 1)]);
        set(pi(3), &[(pi(3), 1)]);
        set(xi(4), &[(pi(5), 1), (pi(6), 1), (pi(7), 1), (xi(4), 1)]);
        set(pi(4), &[(pi(4), 1)]);
        set(xi(5), &[(pi(5), 1)]);
        set(pi(5), &[(pi(2), -1), (pi(3), -1), (pi(4), -1), (xi(5), -1)]);
        set(xi(6), &[(pi(6), 1)]);
        set(pi(6), &[(pi(1), 1), (pi(2), -1), (pi(3), -2), (pi(4), -1), (xi(6), -1)]);
        set(xi(7), &[(pi(7), 1)]);
        set(pi(7), &[(pi(1), 1), (pi(2), -2), (pi(3), -1), (pi(4), -1), (xi(7), -1)]);
        Self { s }
    }
}

pub fn quadrature_label(index: usize) -> String {
    let q = if index.is_multiple_of(2) { "x" } else { "p" };
    format!("{q}{}", index / 2 + 1)
}

/// A commutator entry of `S Ω Sᵀ` that differs from `Ω`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutatorViolation {
    pub first: String,
    pub second: String,
    pub found: i64,
    pub expected: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticReport {
    pub symplectic: bool,
    pub max_deviation: i64,
    pub violations: Vec<CommutatorViolation>,
}

fn omega(i: usize, j: usize) -> i64 {
    if i / 2 != j / 2 {
        0
    } else if i.is_multiple_of(2) && j == i + 1 {
        1
    } else if i % 2 == 1 && j + 1 == i {
        -1
    } else {
        0
    }
}

/// Checks `S Ω Sᵀ = Ω` exactly in integer arithmetic.
pub fn symplectic_check(enc: &EncodingMatrix) -> SymplecticReport {
    let s = &enc.s;
    let mut violations = Vec::new();
    let mut max_deviation = 0;
    for a in 0..PHASE_DIM {
        for b in a + 1..PHASE_DIM {
            let mut v = 0i64;
            for (i, &sai) in s[a].iter().enumerate() {
                if sai == 0 {
                    continue;
                }
                for (j, &sbj) in s[b].iter().enumerate() {
                    v += sai * omega(i, j) * sbj;
                }
            }
            let expected = omega(a, b);
            let dev = (v - expected).abs();
            max_deviation = max_deviation.max(dev);
            if dev != 0 {
                violations.push(CommutatorViolation {
                    first: quadrature_label(a),
                    second: quadrature_label(b),
                    found: v,
                    expected,
                });
            }
        }
    }
    // S Ω Sᵀ is antisymmetric, so the diagonal is always zero
    SymplecticReport { symplectic: violations.is_empty(), max_deviation, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> SyndromeModel {
        SyndromeModel::standard()
    }

    #[test]
    fn unit_error_syndromes() {
        let m = model();
        let e6 = ErrorVector::unit(Quadrature::X, 6).unwrap();
        assert_eq!(compute_syndrome_x(&m, &e6.eps_x, None, None).unwrap(), [-1.0, -2.0, -1.0]);
        let e1 = ErrorVector::unit(Quadrature::X, 1).unwrap();
        assert_eq!(compute_syndrome_x(&m, &e1.eps_x, None, None).unwrap(), [-1.0, -1.0, 0.0]);
        assert_eq!(compute_syndrome_x(&m, &[0.0; 7], None, None).unwrap(), [0.0; 3]);

        let p1 = ErrorVector::unit(Quadrature::P, 1).unwrap();
        assert_eq!(compute_syndrome_p(&m, &p1.eps_p, None, None).unwrap(), [0.0, 1.0, 1.0]);
        let p4 = ErrorVector::unit(Quadrature::P, 4).unwrap();
        assert_eq!(compute_syndrome_p(&m, &p4.eps_p, None, None).unwrap(), [-1.0, -1.0, -1.0]);
        assert_eq!(compute_syndrome_p(&m, &[0.0; 7], None, None).unwrap(), [0.0; 3]);
    }

    #[test]
    fn abrupt_and_ancilla_terms() {
        let m = model();
        let s = compute_syndrome_x(&m, &[0.0; 7], Some(AbruptError { qumode: 7, magnitude: 2.0 }), None).unwrap();
        assert_eq!(s, [-4.0, -2.0, -2.0]);
        let noise = [1.0, 2.0, 3.0, 10.0, 20.0, 30.0];
        let s = compute_syndrome_p(&m, &[0.0; 7], None, Some(&noise)).unwrap();
        assert_eq!(s, [11.0, 22.0, 33.0]);
        assert!(compute_syndrome_x(&m, &[0.0; 7], Some(AbruptError { qumode: 8, magnitude: 1.0 }), None).is_err());
        assert!(compute_syndrome_x(&m, &[0.0; 7], Some(AbruptError { qumode: 0, magnitude: 1.0 }), None).is_err());
    }

    #[test]
    fn table_rows() {
        let rows = syndrome_table(&model());
        assert_eq!(rows.len(), 14);
        assert_eq!(rows[6].label(), "eps_x7");
        assert_eq!(rows[6].syndromes, [-2, -1, -1, 0, 0, 0]);
        assert_eq!(rows[11].label(), "eps_p5");
        assert_eq!(rows[11].syndromes[3..], [-1, 0, 0]);
        assert!(rows[..7].iter().all(|r| r.syndromes[3..] == [0, 0, 0]));
        assert!(rows[7..].iter().all(|r| r.syndromes[..3] == [0, 0, 0]));
    }

    #[test]
    fn gram_matrices() {
        let m = model();
        assert_eq!(m.gram(Quadrature::X), [[8, 6, 4], [6, 8, 4], [4, 4, 4]]);
        assert_eq!(m.gram(Quadrature::P), [[4, 2, 2], [2, 4, 2], [2, 2, 4]]);
        assert_eq!(m.ancilla_gram(Quadrature::X), [[2, 0, 0], [0, 2, 0], [0, 0, 2]]);
        assert_eq!(m.ancilla_gram(Quadrature::P), [[2, 0, 0], [0, 2, 0], [0, 0, 2]]);
    }

    #[test]
    fn columns_are_distinguishable() {
        let m = model();
        assert!(m.columns_distinguishable(Quadrature::X));
        assert!(m.columns_distinguishable(Quadrature::P));
        let mut bad = m.clone();
        for r in 0..3 {
            bad.m_x[r][1] = 2 * bad.m_x[r][0];
        }
        assert!(!bad.columns_distinguishable(Quadrature::X));
    }

    #[test]
    fn correction_examples() {
        let mut state = DisplacementState::zero();
        state.x[0] = 0.25;
        let injected = apply_correction(&state, Quadrature::X, 1, -crate::LATTICE_SPACING).unwrap();
        let back = apply_correction(&injected, Quadrature::X, 1, crate::LATTICE_SPACING).unwrap();
        assert!((back.x[0] - 0.25).abs() < 1e-15);
        assert_eq!(apply_correction(&state, Quadrature::P, 3, 0.0).unwrap(), state);
        let moved = apply_correction(&state, Quadrature::P, 3, 0.5).unwrap();
        assert_eq!(moved.p[2], -0.5);
        assert_eq!(moved.x, state.x);
        assert!(apply_correction(&state, Quadrature::X, 0, 1.0).is_err());
    }

    #[test]
    fn interleaved_layout() {
        let mut e = ErrorVector::default();
        e.eps_x[1] = 3.0;
        e.eps_p[6] = -1.0;
        let v = e.to_interleaved();
        assert_eq!(v[2], 3.0);
        assert_eq!(v[13], -1.0);
        assert_eq!(ErrorVector::from_interleaved(&v).unwrap(), e);
    }

    #[test]
    fn symplectic_cases() {
        assert!(symplectic_check(&EncodingMatrix::identity()).symplectic);
        let report = symplectic_check(&EncodingMatrix::steane());
        assert!(report.symplectic, "{:?}", report.violations);
        assert_eq!(report.max_deviation, 0);

        let mut flipped = EncodingMatrix::steane();
        flipped.s[0][2 * 5 + 1] = 1; // x1_enc: -p6 -> +p6
        let report = symplectic_check(&flipped);
        assert!(!report.symplectic);
        assert!(report.violations.iter().any(|v| v.first == "x1"));
    }

    proptest! {
        #[test]
        fn syndrome_is_linear(a in prop::array::uniform7(-5.0f64..5.0), b in prop::array::uniform7(-5.0f64..5.0)) {
            let m = model();
            for q in Quadrature::BOTH {
                let sum: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                let sum: [f64; 7] = sum.try_into().unwrap();
                let lhs = compute_syndrome(&m, q, &sum, None, None).unwrap();
                let ra = compute_syndrome(&m, q, &a, None, None).unwrap();
                let rb = compute_syndrome(&m, q, &b, None, None).unwrap();
                for i in 0..3 {
                    prop_assert!((lhs[i] - ra[i] - rb[i]).abs() <= 4.0 * f64::EPSILON * 64.0);
                }
            }
        }
    }
}
