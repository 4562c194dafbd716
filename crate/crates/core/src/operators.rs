//! Single-atom and pair operator bases.
//!
//! Levels are numbered 1..=4: |1⟩ is the ground state and |2⟩, |3⟩, |4⟩ are
//! the excited Zeeman sublevels m = −1, 0, +1. The single-atom basis is
//!
//! | index | element |
//! |-------|---------|
//! | 0     | 𝟙/2 |
//! | 1     | μ₁/2, μ₁ = σ₂₂ − σ₃₃ + σ₄₄ − σ₁₁ |
//! | 2     | μ₂/2, μ₂ = σ₂₂ − σ₃₃ − σ₄₄ + σ₁₁ |
//! | 3     | μ₃/2, μ₃ = σ₂₂ + σ₃₃ − σ₄₄ − σ₁₁ |
//! | 4..16 | σ_kl for k ≠ l in lexicographic order (12, 13, 14, 21, …, 43) |
//!
//! and is orthonormal under `Tr[Q_n Q_mᵀ]`. Pair elements `Q_i ⊗ Q_j` are
//! flattened row-major (`16 i + j`); the truncated index drops the constant
//! of motion `𝟙⊗𝟙/4` at flat index 0.

use std::sync::OnceLock;

use nalgebra::{DVector, Matrix4, SMatrix};
use thiserror::Error;

use crate::geometry::{C64, ONE, ZERO};

pub type Op4 = Matrix4<C64>;
/// Matrix of a linear map on single-atom operators in basis coordinates:
/// row `n` holds the coordinates of the image of `Q_n`.
pub type SuperOp16 = SMatrix<C64, 16, 16>;

pub const SINGLE_DIM: usize = 16;
pub const PAIR_DIM: usize = 256;
pub const TRUNCATED_DIM: usize = 255;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("operator has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected a vector of length {expected}, got {found}")]
    Length { expected: usize, found: usize },
}

/// `σ_kl = |k⟩⟨l|` with 1-based level labels.
pub fn sigma(k: usize, l: usize) -> Op4 {
    assert!((1..=4).contains(&k) && (1..=4).contains(&l), "level out of range");
    let mut m = Op4::zeros();
    m[(k - 1, l - 1)] = ONE;
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    HalfIdentity,
    /// `μ_i / 2` for i = 1, 2, 3.
    HalfMu(u8),
    /// `σ_kl`, k ≠ l.
    Sigma(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleAtomOperator {
    pub label: BasisLabel,
    pub matrix: Op4,
}

fn mu(i: u8) -> Op4 {
    let (s11, s22, s33, s44) = match i {
        1 => (-1.0, 1.0, -1.0, 1.0),
        2 => (1.0, 1.0, -1.0, -1.0),
        3 => (-1.0, 1.0, 1.0, -1.0),
        _ => unreachable!(),
    };
    Op4::from_diagonal(&nalgebra::Vector4::new(s11, s22, s33, s44).map(|x| C64::new(x, 0.0)))
}

pub fn single_atom_basis() -> &'static [SingleAtomOperator] {
    static BASIS: OnceLock<Vec<SingleAtomOperator>> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut out = vec![SingleAtomOperator {
            label: BasisLabel::HalfIdentity,
            matrix: Op4::identity() * C64::new(0.5, 0.0),
        }];
        for i in 1..=3u8 {
            out.push(SingleAtomOperator {
                label: BasisLabel::HalfMu(i),
                matrix: mu(i) * C64::new(0.5, 0.0),
            });
        }
        for k in 1..=4 {
            for l in 1..=4 {
                if k != l {
                    out.push(SingleAtomOperator {
                        label: BasisLabel::Sigma(k, l),
                        matrix: sigma(k, l),
                    });
                }
            }
        }
        out
    })
}

/// Coordinates `c_m = Tr[X Q_mᵀ]`.
pub fn coordinates(x: &Op4) -> [C64; SINGLE_DIM] {
    let mut c = [ZERO; SINGLE_DIM];
    for (slot, q) in c.iter_mut().zip(single_atom_basis()) {
        *slot = x.component_mul(&q.matrix).sum();
    }
    c
}

/// Inverse of [`coordinates`]: `X = Σ c_m Q_m`.
pub fn reconstruct(c: &[C64; SINGLE_DIM]) -> Op4 {
    single_atom_basis()
        .iter()
        .zip(c.iter())
        .fold(Op4::zeros(), |acc, (q, ci)| acc + q.matrix * *ci)
}

/// Build the coordinate matrix of a linear map on single-atom operators.
pub fn superoperator(f: impl Fn(&Op4) -> Op4) -> SuperOp16 {
    let mut m = SuperOp16::zeros();
    for (n, q) in single_atom_basis().iter().enumerate() {
        for (col, c) in coordinates(&f(&q.matrix)).iter().enumerate() {
            m[(n, col)] = *c;
        }
    }
    m
}

fn excited(level: usize) -> i32 {
    i32::from(level > 1)
}

/// Excitation charge `e_l − e_k` of a single-atom basis element. Diagonal
/// elements carry zero; `σ_1e` (lowering) carries +1.
pub fn charge(index: usize) -> i32 {
    match single_atom_basis()[index].label {
        BasisLabel::Sigma(k, l) => excited(l) - excited(k),
        _ => 0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub first: usize,
    pub second: usize,
}

impl PairIndex {
    pub fn new(first: usize, second: usize) -> Self {
        assert!(first < SINGLE_DIM && second < SINGLE_DIM);
        Self { first, second }
    }

    pub fn flat(self) -> usize {
        SINGLE_DIM * self.first + self.second
    }

    pub fn from_flat(flat: usize) -> Self {
        Self::new(flat / SINGLE_DIM, flat % SINGLE_DIM)
    }

    /// `None` for the excluded constant of motion.
    pub fn truncated(self) -> Option<usize> {
        self.flat().checked_sub(1)
    }

    pub fn from_truncated(index: usize) -> Self {
        Self::from_flat(index + 1)
    }
}

/// Sum of products `Σ c · A ⊗ B` acting on atoms (first, second).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairOperator {
    pub terms: Vec<(C64, Op4, Op4)>,
}

impl PairOperator {
    pub fn on_first(op: Op4) -> Self {
        Self::product(op, Op4::identity())
    }

    pub fn on_second(op: Op4) -> Self {
        Self::product(Op4::identity(), op)
    }

    /// Atom-indexed embedding: 0 is the first atom, 1 the second.
    pub fn on_atom(atom: usize, op: Op4) -> Self {
        if atom == 0 {
            Self::on_first(op)
        } else {
            Self::on_second(op)
        }
    }

    pub fn product(first: Op4, second: Op4) -> Self {
        Self { terms: vec![(ONE, first, second)] }
    }

    pub fn plus(mut self, other: PairOperator) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        for t in &mut self.terms {
            t.0 *= factor;
        }
        self
    }
}

/// Sparse linear functional on pair coordinates. `constant` multiplies the
/// coordinate of `𝟙⊗𝟙/4` whose expectation value is fixed at 1/4.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableCoordinates {
    pub constant: C64,
    /// `(truncated index, coefficient)` pairs, sorted by index.
    pub entries: Vec<(usize, C64)>,
}

impl ObservableCoordinates {
    /// Expectation value on a complete state vector (order 0 or full).
    pub fn expectation(&self, x: &DVector<C64>) -> C64 {
        self.constant * 0.25 + self.correction(x)
    }

    /// Contribution of a perturbative correction (order ≥ 1), on which the
    /// constant of motion does not act.
    pub fn correction(&self, x: &DVector<C64>) -> C64 {
        self.entries.iter().map(|&(i, c)| c * x[i]).sum()
    }

    pub fn dense(&self) -> DVector<C64> {
        let mut v = DVector::zeros(TRUNCATED_DIM);
        for &(i, c) in &self.entries {
            v[i] = c;
        }
        v
    }
}

fn check_finite(op: &Op4) -> Result<(), OperatorError> {
    for row in 0..4 {
        for col in 0..4 {
            let z = op[(row, col)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(OperatorError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// Express `Tr[ρ O]` as a functional of the pair coordinates `⟨Q_n⟩`.
pub fn observable_coordinates(obs: &PairOperator) -> Result<ObservableCoordinates, OperatorError> {
    let mut dense = [ZERO; PAIR_DIM];
    for (c, a, b) in &obs.terms {
        check_finite(a)?;
        check_finite(b)?;
        let ca = coordinates(a);
        let cb = coordinates(b);
        for i in 0..SINGLE_DIM {
            if ca[i] == ZERO {
                continue;
            }
            for j in 0..SINGLE_DIM {
                dense[SINGLE_DIM * i + j] += c * ca[i] * cb[j];
            }
        }
    }
    let entries = dense[1..]
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != ZERO)
        .map(|(i, z)| (i, *z))
        .collect();
    Ok(ObservableCoordinates { constant: dense[0], entries })
}

/// Full 256-vector `⟨Q_n⟩` from a truncated one.
pub fn complete(x: &DVector<C64>) -> Result<DVector<C64>, OperatorError> {
    if x.len() != TRUNCATED_DIM {
        return Err(OperatorError::Length { expected: TRUNCATED_DIM, found: x.len() });
    }
    let mut full = DVector::zeros(PAIR_DIM);
    full[0] = C64::new(0.25, 0.0);
    full.rows_mut(1, TRUNCATED_DIM).copy_from(x);
    Ok(full)
}
