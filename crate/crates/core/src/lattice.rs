//! Integral lattices given by a symmetric Gram matrix in a fixed basis.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::{self, IntegerMatrix, LinalgError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("vector of length {found} does not belong to a lattice of rank {rank}")]
    LengthMismatch { rank: usize, found: usize },
    #[error("matrix is {rows}x{cols}, lattice has rank {rank}")]
    MatrixShape { rows: usize, cols: usize, rank: usize },
    #[error("matrix does not preserve the Gram form")]
    NotAnIsometry,
    #[error("cannot reflect in a vector of norm {0}; norm must be 2 or -2")]
    BadReflectionNorm(BigInt),
    #[error("reflection is not integral")]
    NonIntegralReflection,
    #[error("unknown lattice name `{0}`")]
    UnknownName(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Coordinates of a lattice element in the lattice's fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<BigInt>);

impl LatticeVector {
    pub fn new<T: Into<BigInt>>(coords: impl IntoIterator<Item = T>) -> Self {
        LatticeVector(coords.into_iter().map(Into::into).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); rank])
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    gram: IntegerMatrix,
    label: String,
    // Nonzero Gram entries, so inner products cost O(nnz).
    support: Vec<(usize, usize, BigInt)>,
}

impl Lattice {
    pub fn new(gram: IntegerMatrix, label: impl Into<String>) -> Result<Self, LatticeError> {
        if !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        let n = gram.rows();
        let support = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !gram[(i, j)].is_zero())
            .map(|(i, j)| (i, j, gram[(i, j)].clone()))
            .collect();
        Ok(Lattice { gram, label: label.into(), support })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &IntegerMatrix {
        &self.gram
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Nonzero Gram entries as `(row, col, value)`.
    pub fn gram_support(&self) -> &[(usize, usize, BigInt)] {
        &self.support
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    pub fn determinant(&self) -> BigInt {
        linalg::determinant(&self.gram).expect("Gram matrices are square")
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    /// Sylvester's criterion on the leading principal minors.
    pub fn definiteness(&self) -> Definiteness {
        let minors = self.leading_principal_minors();
        if minors.iter().all(Signed::is_positive) {
            return Definiteness::PositiveDefinite;
        }
        let alternating =
            minors.iter().enumerate().all(|(k, d)| if k % 2 == 0 { d.is_negative() } else { d.is_positive() });
        if alternating {
            return Definiteness::NegativeDefinite;
        }
        if self.determinant().is_zero() {
            Definiteness::Degenerate
        } else {
            Definiteness::Indefinite
        }
    }

    /// `D_1, ..., D_n`, where `D_k` is the determinant of the top-left k×k block.
    pub fn leading_principal_minors(&self) -> Vec<BigInt> {
        (1..=self.rank()).map(|k| linalg::determinant(&self.gram.leading_minor(k)).expect("square")).collect()
    }

    /// `uᵀ · gram · v`, computed on raw coordinate slices.
    pub fn inner_coords(&self, u: &[BigInt], v: &[BigInt]) -> Result<BigInt, LatticeError> {
        for w in [u, v] {
            if w.len() != self.rank() {
                return Err(LatticeError::LengthMismatch { rank: self.rank(), found: w.len() });
            }
        }
        Ok(self
            .support
            .iter()
            .filter(|(i, j, _)| !u[*i].is_zero() && !v[*j].is_zero())
            .map(|(i, j, g)| &u[*i] * g * &v[*j])
            .sum())
    }

    pub fn norm(&self, v: &LatticeVector) -> Result<BigInt, LatticeError> {
        self.inner_coords(&v.0, &v.0)
    }

    fn check_square(&self, m: &IntegerMatrix) -> Result<(), LatticeError> {
        if m.rows() != self.rank() || m.cols() != self.rank() {
            return Err(LatticeError::MatrixShape { rows: m.rows(), cols: m.cols(), rank: self.rank() });
        }
        Ok(())
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rank {})", self.label, self.rank())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
    Degenerate,
}

impl Definiteness {
    pub fn as_str(self) -> &'static str {
        match self {
            Definiteness::PositiveDefinite => "positive definite",
            Definiteness::NegativeDefinite => "negative definite",
            Definiteness::Indefinite => "indefinite",
            Definiteness::Degenerate => "degenerate",
        }
    }
}

/// An automorphism of a lattice, acting on coordinate columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry {
    matrix: IntegerMatrix,
}

impl Isometry {
    pub fn new(lattice: &Lattice, matrix: IntegerMatrix) -> Result<Self, LatticeError> {
        if !is_isometry(lattice, &matrix)? {
            return Err(LatticeError::NotAnIsometry);
        }
        Ok(Isometry { matrix })
    }

    pub fn identity(lattice: &Lattice) -> Self {
        Isometry { matrix: IntegerMatrix::identity(lattice.rank()) }
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> IntegerMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector, LatticeError> {
        Ok(LatticeVector(self.matrix.mul_vec(&v.0)?))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry, LatticeError> {
        Ok(Isometry { matrix: self.matrix.checked_mul(&other.matrix)? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardLattice {
    U,
    E8,
    MinusE8,
    EnriquesH2,
    MukaiH2,
}

impl FromStr for StandardLattice {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "U" | "u" => Ok(StandardLattice::U),
            "E8" | "e8" => Ok(StandardLattice::E8),
            "minusE8" | "minus-e8" | "-E8" => Ok(StandardLattice::MinusE8),
            "enriques_h2" | "enriques-h2" => Ok(StandardLattice::EnriquesH2),
            "mukai_h2" | "mukai-h2" => Ok(StandardLattice::MukaiH2),
            other => Err(LatticeError::UnknownName(other.to_string())),
        }
    }
}

/// Gram matrix of the hyperbolic plane in the basis (e, f).
pub fn hyperbolic_plane_gram() -> IntegerMatrix {
    IntegerMatrix::from_rows(&[[0, 1], [1, 0]]).unwrap()
}

/// Positive definite E8. Dynkin chain 1-2-3-4-5-6-7 with node 8 attached to node 5.
pub fn e8_gram() -> IntegerMatrix {
    const EDGES: [(usize, usize); 7] = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    let mut g = IntegerMatrix::diagonal(&[2; 8]);
    for (a, b) in EDGES {
        g[(a, b)] = BigInt::from(-1);
        g[(b, a)] = BigInt::from(-1);
    }
    g
}

pub fn standard_lattice(name: StandardLattice) -> Lattice {
    let u = || Lattice::new(hyperbolic_plane_gram(), "U").unwrap();
    let minus_e8 = || Lattice::new(e8_gram().neg(), "-E8").unwrap();
    match name {
        StandardLattice::U => u(),
        StandardLattice::E8 => Lattice::new(e8_gram(), "E8").unwrap(),
        StandardLattice::MinusE8 => minus_e8(),
        StandardLattice::EnriquesH2 => relabel(direct_sum(&u(), &minus_e8()), "H2(Enriques)/tors"),
        StandardLattice::MukaiH2 => {
            // Coordinate order (x: 0..8, y: 8..16, z1: 16..18, z2: 18..20, z3: 20..22).
            let l =
                [minus_e8(), minus_e8(), u(), u(), u()].iter().skip(1).fold(minus_e8(), |acc, f| direct_sum(&acc, f));
            relabel(l, "H2(K3)")
        }
    }
}

fn relabel(l: Lattice, label: &str) -> Lattice {
    Lattice { label: label.to_string(), ..l }
}

pub fn direct_sum(a: &Lattice, b: &Lattice) -> Lattice {
    let gram = IntegerMatrix::block_diagonal(&[a.gram(), b.gram()]);
    Lattice::new(gram, format!("{} + {}", a.label, b.label)).expect("block sum of symmetric forms")
}

pub fn inner(l: &Lattice, u: &LatticeVector, v: &LatticeVector) -> Result<BigInt, LatticeError> {
    l.inner_coords(&u.0, &v.0)
}

/// `Mᵀ·G·M = G` and `|det M| = 1`.
pub fn is_isometry(l: &Lattice, m: &IntegerMatrix) -> Result<bool, LatticeError> {
    l.check_square(m)?;
    let preserved = &(&m.transpose() * l.gram()) * m == *l.gram();
    Ok(preserved && linalg::determinant(m)?.abs().is_one())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedSublattice {
    /// Columns are a Z-basis of the eigenlattice, in ambient coordinates.
    pub basis: IntegerMatrix,
    /// `basisᵀ · G · basis`.
    pub gram: IntegerMatrix,
}

impl FixedSublattice {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn lattice(&self, label: &str) -> Lattice {
        Lattice::new(self.gram.clone(), label).expect("restricted form is symmetric")
    }

    /// Ambient coordinates of `Σ coeffs[i] · basis_i`.
    pub fn embed(&self, coeffs: &[BigInt]) -> Vec<BigInt> {
        self.basis.mul_vec(coeffs).expect("coefficient count matches rank")
    }
}

/// Kernel of `M − sign·I`, with the restricted Gram form. `M² = I` is not required.
pub fn fixed_sublattice(l: &Lattice, m: &Isometry, sign: Sign) -> FixedSublattice {
    let shifted = m
        .matrix
        .checked_sub(&IntegerMatrix::identity(l.rank()).scale(&BigInt::from(sign.value())))
        .expect("isometry matrix has lattice rank");
    let basis = linalg::integer_kernel(&shifted);
    let gram = &(&basis.transpose() * l.gram()) * &basis;
    FixedSublattice { basis, gram }
}

/// `σ_w(x) = x − (2⟨x,w⟩/⟨w,w⟩)·w` for `w² = ±2`.
pub fn reflection(l: &Lattice, w: &LatticeVector) -> Result<Isometry, LatticeError> {
    let w2 = l.norm(w)?;
    if w2.abs() != BigInt::from(2) {
        return Err(LatticeError::BadReflectionNorm(w2));
    }
    let gw = l.gram().mul_vec(&w.0)?;
    let n = l.rank();
    let mut m = IntegerMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let num = BigInt::from(2) * &w.0[i] * &gw[j];
            if !(&num % &w2).is_zero() {
                return Err(LatticeError::NonIntegralReflection);
            }
            m[(i, j)] -= num / &w2;
        }
    }
    Isometry::new(l, m)
}

/// Every `v` with coordinates in `[-bound, bound]` and `v² = target`, in lexicographic order.
pub fn short_vectors(l: &Lattice, target: &BigInt, bound: u32) -> Vec<LatticeVector> {
    let n = l.rank();
    if n == 0 {
        return if target.is_zero() { vec![LatticeVector(vec![])] } else { vec![] };
    }
    let b = i64::from(bound);
    match small_support(l, b) {
        Some(support) => {
            let Some(target) = target.to_i64() else { return vec![] };
            box_points(n, b)
                .filter(|v| support.iter().map(|&(i, j, g)| v[i] * g * v[j]).sum::<i64>() == target)
                .map(LatticeVector::new)
                .collect()
        }
        None => {
            box_points(n, b).map(LatticeVector::new).filter(|v| &l.norm(v).expect("rank matches") == target).collect()
        }
    }
}

/// Gram support as machine integers, when `Σ |g_ij|·bound²` provably fits in an i64.
fn small_support(l: &Lattice, bound: i64) -> Option<Vec<(usize, usize, i64)>> {
    let b2 = bound.checked_mul(bound)?;
    let mut total: i64 = 0;
    let mut out = Vec::with_capacity(l.support.len());
    for (i, j, g) in &l.support {
        let g = g.to_i64()?;
        total = total.checked_add(g.checked_abs()?.checked_mul(b2)?)?;
        out.push((*i, *j, g));
    }
    Some(out)
}

fn box_points(n: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let mut next = Some(vec![-bound; n]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for k in (0..n).rev() {
            if succ[k] < bound {
                succ[k] += 1;
                next = Some(succ);
                break;
            }
            succ[k] = -bound;
        }
        Some(current)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u_lattice() -> Lattice {
        standard_lattice(StandardLattice::U)
    }

    #[test]
    fn hyperbolic_plane_relations() {
        let u = u_lattice();
        let e = LatticeVector::new([1, 0]);
        let f = LatticeVector::new([0, 1]);
        assert_eq!(inner(&u, &e, &f).unwrap(), BigInt::one());
        assert_eq!(inner(&u, &e, &e).unwrap(), BigInt::zero());
        assert_eq!(inner(&u, &f, &f).unwrap(), BigInt::zero());
        assert_eq!(*u.gram(), hyperbolic_plane_gram());
    }

    #[test]
    fn minus_e8_is_even_unimodular_negative_definite() {
        let l = standard_lattice(StandardLattice::MinusE8);
        assert_eq!(l.rank(), 8);
        assert!(l.is_even());
        assert_eq!(l.determinant(), BigInt::one());
        assert_eq!(l.definiteness(), Definiteness::NegativeDefinite);
        for (k, d) in l.leading_principal_minors().iter().enumerate() {
            let signed = if k % 2 == 0 { -d } else { d.clone() };
            assert!(signed.is_positive(), "minor {} = {}", k + 1, d);
        }
    }

    #[test]
    fn mukai_h2_shape() {
        let l = standard_lattice(StandardLattice::MukaiH2);
        assert_eq!(l.rank(), 22);
        assert!(l.is_even());
        assert_eq!(l.determinant(), BigInt::from(-1));
        assert_eq!(l.definiteness(), Definiteness::Indefinite);
    }

    #[test]
    fn enriques_lattice_shape() {
        let l = standard_lattice(StandardLattice::EnriquesH2);
        assert_eq!(l.rank(), 10);
        assert!(l.is_even());
        assert_eq!(l.determinant(), BigInt::from(-1));
    }

    #[test]
    fn direct_sums() {
        let u = u_lattice();
        let uu = direct_sum(&u, &u);
        assert_eq!(uu.rank(), 4);
        assert_eq!(uu.gram()[(0, 2)], BigInt::zero());
        assert_eq!(uu.gram()[(2, 3)], BigInt::one());
        let mu = direct_sum(&standard_lattice(StandardLattice::MinusE8), &u);
        assert_eq!(mu.rank(), 10);
        assert_eq!(mu.determinant(), BigInt::from(-1));
    }

    #[test]
    fn unknown_name_rejected() {
        assert_eq!("D4".parse::<StandardLattice>(), Err(LatticeError::UnknownName("D4".into())));
    }

    #[test]
    fn inner_rejects_wrong_length() {
        let u = u_lattice();
        let err = inner(&u, &LatticeVector::new([1]), &LatticeVector::new([1, 0])).unwrap_err();
        assert_eq!(err, LatticeError::LengthMismatch { rank: 2, found: 1 });
    }

    #[test]
    fn isometry_checks() {
        let u = u_lattice();
        assert!(is_isometry(&u, &IntegerMatrix::identity(2)).unwrap());
        let swap = IntegerMatrix::from_rows(&[[0, 1], [1, 0]]).unwrap();
        assert!(is_isometry(&u, &swap).unwrap());
        let zero_col = IntegerMatrix::from_rows(&[[1, 0], [0, 0]]).unwrap();
        assert!(!is_isometry(&u, &zero_col).unwrap());
        assert!(matches!(is_isometry(&u, &IntegerMatrix::identity(3)), Err(LatticeError::MatrixShape { .. })));
        assert_eq!(Isometry::new(&u, zero_col), Err(LatticeError::NotAnIsometry));
    }

    #[test]
    fn reflection_in_hyperbolic_plane() {
        let u = u_lattice();
        let w = LatticeVector::new([1, 1]);
        let s = reflection(&u, &w).unwrap();
        assert_eq!(s.apply(&LatticeVector::new([1, 0])).unwrap(), LatticeVector::new([0, -1]));
        assert_eq!(s.apply(&w).unwrap(), LatticeVector::new([-1, -1]));
        assert_eq!(s.compose(&s).unwrap(), Isometry::identity(&u));
    }

    #[test]
    fn reflection_rejects_bad_norm() {
        let u = u_lattice();
        assert_eq!(reflection(&u, &LatticeVector::new([1, 0])), Err(LatticeError::BadReflectionNorm(BigInt::zero())));
        assert_eq!(reflection(&u, &LatticeVector::new([2, 1])), Err(LatticeError::BadReflectionNorm(BigInt::from(4))));
    }

    #[test]
    fn identity_fixes_everything() {
        let l = standard_lattice(StandardLattice::MinusE8);
        let fixed = fixed_sublattice(&l, &Isometry::identity(&l), Sign::Plus);
        assert_eq!(fixed.rank(), 8);
        assert_eq!(linalg::determinant(&fixed.gram).unwrap(), BigInt::one());
        assert_eq!(fixed_sublattice(&l, &Isometry::identity(&l), Sign::Minus).rank(), 0);
    }

    #[test]
    fn short_vectors_in_hyperbolic_plane() {
        let u = u_lattice();
        let isotropic = short_vectors(&u, &BigInt::zero(), 1);
        for v in [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]] {
            assert!(isotropic.contains(&LatticeVector::new(v)));
        }
        assert_eq!(
            short_vectors(&u, &BigInt::from(2), 1),
            vec![LatticeVector::new([-1, -1]), LatticeVector::new([1, 1])]
        );
    }

    #[test]
    fn short_vectors_bound_zero() {
        let l = standard_lattice(StandardLattice::MinusE8);
        assert_eq!(short_vectors(&l, &BigInt::zero(), 0), vec![LatticeVector::zero(8)]);
        assert!(short_vectors(&l, &BigInt::from(-2), 0).is_empty());
    }

    #[test]
    fn short_vectors_big_path_matches_small_path() {
        let huge = BigInt::from(i64::MAX);
        let g = IntegerMatrix::from_rows(&[vec![BigInt::from(2), huge.clone()], vec![huge, BigInt::from(2)]]).unwrap();
        let l = Lattice::new(g, "big").unwrap();
        let found = short_vectors(&l, &BigInt::from(2), 1);
        assert_eq!(
            found,
            vec![
                LatticeVector::new([-1, 0]),
                LatticeVector::new([0, -1]),
                LatticeVector::new([0, 1]),
                LatticeVector::new([1, 0])
            ]
        );
    }

    #[test]
    fn e8_roots_within_unit_box() {
        // Every simple root and its negative shows up; the box count is a regression pin.
        let l = standard_lattice(StandardLattice::E8);
        let roots = short_vectors(&l, &BigInt::from(2), 1);
        for i in 0..8 {
            let mut v = vec![0i64; 8];
            v[i] = 1;
            assert!(roots.contains(&LatticeVector::new(v.clone())));
            v[i] = -1;
            assert!(roots.contains(&LatticeVector::new(v)));
        }
        assert!(roots.windows(2).all(|w| w[0] < w[1]));
    }
}
