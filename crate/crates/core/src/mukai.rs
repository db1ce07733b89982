//! The Mukai lattice `H⁰ ⊕ H² ⊕ H⁴` of a K3 surface covering an Enriques
//! surface, with the covering involution, B-field exponentials and the
//! integral twisted involution `T = e^{2B} ∘ τ*`.
//!
//! `H²` uses the coordinates of [`StandardLattice::MukaiH2`]:
//! `x = 0..8`, `y = 8..16`, `z1 = 16..18`, `z2 = 18..20`, `z3 = 20..22`, each
//! hyperbolic plane in the basis `(e, f)`. A full Mukai vector is laid out as
//! `(r, c_0, ..., c_21, s)`, so it has 24 coordinates.
//!
//! The pairing is `⟨(r,c,s),(r',c',s')⟩ = c·c' − r·s' − r'·s`.

use std::ops::Range;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::lattice::{standard_lattice, Isometry, Lattice, StandardLattice};
use crate::linalg::IntegerMatrix;

pub const H2_RANK: usize = 22;
pub const MUKAI_RANK: usize = 24;

pub const X: Range<usize> = 0..8;
pub const Y: Range<usize> = 8..16;
pub const Z1: Range<usize> = 16..18;
pub const Z2: Range<usize> = 18..20;
pub const Z3: Range<usize> = 20..22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MukaiError {
    #[error("H2 part has {0} coordinates, expected 22")]
    BadLength(usize),
    #[error("vector has non-integral coordinates")]
    NotIntegral,
}

/// The rank-22 lattice `−E8 ⊕ −E8 ⊕ U ⊕ U ⊕ U`.
pub fn h2_lattice() -> &'static Lattice {
    static H2: OnceLock<Lattice> = OnceLock::new();
    H2.get_or_init(|| standard_lattice(StandardLattice::MukaiH2))
}

/// Gram matrix of the full rank-24 Mukai lattice in `(r, c, s)` coordinates.
pub fn mukai_gram() -> IntegerMatrix {
    let mut g = IntegerMatrix::zeros(MUKAI_RANK, MUKAI_RANK);
    let h2 = h2_lattice().gram();
    for i in 0..H2_RANK {
        for j in 0..H2_RANK {
            g[(i + 1, j + 1)] = h2[(i, j)].clone();
        }
    }
    g[(0, MUKAI_RANK - 1)] = BigInt::from(-1);
    g[(MUKAI_RANK - 1, 0)] = BigInt::from(-1);
    g
}

pub fn mukai_lattice() -> &'static Lattice {
    static FULL: OnceLock<Lattice> = OnceLock::new();
    FULL.get_or_init(|| Lattice::new(mukai_gram(), "H*(K3)").expect("Mukai Gram is symmetric"))
}

fn rational_h2_inner(u: &[BigRational], v: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for (i, j, g) in h2_lattice().gram_support() {
        let (a, b) = (&u[*i], &v[*j]);
        if !a.is_zero() && !b.is_zero() {
            acc += a * b * BigRational::from_integer(g.clone());
        }
    }
    acc
}

/// Applies `(x, y, z1, z2, z3) ↦ (y, x, z2, z1, −z3)` to an H² coordinate slice.
pub fn tau_star_h2<T: Clone + std::ops::Neg<Output = T>>(c: &[T]) -> Vec<T> {
    assert_eq!(c.len(), H2_RANK, "H2 coordinates have length 22");
    let mut out = Vec::with_capacity(H2_RANK);
    out.extend_from_slice(&c[Y]);
    out.extend_from_slice(&c[X]);
    out.extend_from_slice(&c[Z2]);
    out.extend_from_slice(&c[Z1]);
    out.extend(c[Z3].iter().cloned().map(|z| -z));
    out
}

/// Matrix of the covering involution on H².
pub fn tau_star_h2_isometry() -> Isometry {
    let cols: Vec<Vec<BigInt>> = (0..H2_RANK)
        .map(|j| {
            let mut e = vec![BigInt::zero(); H2_RANK];
            e[j] = BigInt::one();
            tau_star_h2(&e)
        })
        .collect();
    let m = IntegerMatrix::from_columns(H2_RANK, &cols).unwrap();
    Isometry::new(h2_lattice(), m).expect("the covering involution preserves the H2 form")
}

/// An integral Mukai vector `(r, c, s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MukaiVector {
    pub r: BigInt,
    pub c: Vec<BigInt>,
    pub s: BigInt,
}

impl MukaiVector {
    pub fn new(r: impl Into<BigInt>, c: Vec<BigInt>, s: impl Into<BigInt>) -> Result<Self, MukaiError> {
        if c.len() != H2_RANK {
            return Err(MukaiError::BadLength(c.len()));
        }
        Ok(MukaiVector { r: r.into(), c, s: s.into() })
    }

    pub fn zero() -> Self {
        MukaiVector { r: BigInt::zero(), c: vec![BigInt::zero(); H2_RANK], s: BigInt::zero() }
    }

    /// The point class `(0, 0, 1)`.
    pub fn point() -> Self {
        MukaiVector { s: BigInt::one(), ..Self::zero() }
    }

    /// `(0, ℓ, 0)`.
    pub fn from_h2(c: Vec<BigInt>) -> Result<Self, MukaiError> {
        Self::new(0, c, 0)
    }

    pub fn from_coords(coords: &[BigInt]) -> Result<Self, MukaiError> {
        if coords.len() != MUKAI_RANK {
            return Err(MukaiError::BadLength(coords.len().saturating_sub(2)));
        }
        Self::new(coords[0].clone(), coords[1..MUKAI_RANK - 1].to_vec(), coords[MUKAI_RANK - 1].clone())
    }

    pub fn to_coords(&self) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(MUKAI_RANK);
        out.push(self.r.clone());
        out.extend_from_slice(&self.c);
        out.push(self.s.clone());
        out
    }

    pub fn to_rational(&self) -> RationalMukaiVector {
        RationalMukaiVector {
            r: BigRational::from_integer(self.r.clone()),
            c: self.c.iter().cloned().map(BigRational::from_integer).collect(),
            s: BigRational::from_integer(self.s.clone()),
        }
    }

    pub fn pairing(&self, other: &MukaiVector) -> BigInt {
        let cc = h2_lattice().inner_coords(&self.c, &other.c).expect("length checked at construction");
        cc - &self.r * &other.s - &other.r * &self.s
    }

    pub fn square(&self) -> BigInt {
        self.pairing(self)
    }

    pub fn add(&self, other: &MukaiVector) -> MukaiVector {
        MukaiVector {
            r: &self.r + &other.r,
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
            s: &self.s + &other.s,
        }
    }
}

/// A rational Mukai vector; all equality is exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMukaiVector {
    pub r: BigRational,
    pub c: Vec<BigRational>,
    pub s: BigRational,
}

impl RationalMukaiVector {
    pub fn new(r: BigRational, c: Vec<BigRational>, s: BigRational) -> Result<Self, MukaiError> {
        if c.len() != H2_RANK {
            return Err(MukaiError::BadLength(c.len()));
        }
        Ok(RationalMukaiVector { r, c, s })
    }

    pub fn is_integral(&self) -> bool {
        self.r.is_integer() && self.s.is_integer() && self.c.iter().all(BigRational::is_integer)
    }

    pub fn to_integral(&self) -> Result<MukaiVector, MukaiError> {
        if !self.is_integral() {
            return Err(MukaiError::NotIntegral);
        }
        Ok(MukaiVector {
            r: self.r.to_integer(),
            c: self.c.iter().map(BigRational::to_integer).collect(),
            s: self.s.to_integer(),
        })
    }
}

impl From<&MukaiVector> for RationalMukaiVector {
    fn from(v: &MukaiVector) -> Self {
        v.to_rational()
    }
}

/// A rational class in H², used as a twist.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BField {
    pub b: Vec<BigRational>,
}

impl BField {
    pub fn new(b: Vec<BigRational>) -> Result<Self, MukaiError> {
        if b.len() != H2_RANK {
            return Err(MukaiError::BadLength(b.len()));
        }
        Ok(BField { b })
    }

    /// `½e + ½f` in the third hyperbolic plane, zero elsewhere.
    pub fn canonical() -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut b = vec![BigRational::zero(); H2_RANK];
        for i in Z3 {
            b[i] = half.clone();
        }
        BField { b }
    }

    pub fn scaled(&self, k: &BigRational) -> Self {
        BField { b: self.b.iter().map(|x| x * k).collect() }
    }

    pub fn neg(&self) -> Self {
        BField { b: self.b.iter().map(|x| -x).collect() }
    }

    pub fn square(&self) -> BigRational {
        rational_h2_inner(&self.b, &self.b)
    }

    pub fn tau_star(&self) -> Self {
        BField { b: tau_star_h2(&self.b) }
    }
}

pub fn mukai_pairing(u: &RationalMukaiVector, v: &RationalMukaiVector) -> BigRational {
    rational_h2_inner(&u.c, &v.c) - &u.r * &v.s - &v.r * &u.s
}

/// Identity on H⁰ and H⁴, the covering involution on H².
pub fn tau_star(v: &RationalMukaiVector) -> RationalMukaiVector {
    RationalMukaiVector { r: v.r.clone(), c: tau_star_h2(&v.c), s: v.s.clone() }
}

/// `e^B(r, c, s) = (r, c + rB, s + c·B + ½rB²)`.
pub fn exp_b(b: &BField, v: &RationalMukaiVector) -> RationalMukaiVector {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let c = v.c.iter().zip(&b.b).map(|(ci, bi)| ci + &v.r * bi).collect();
    let s = &v.s + rational_h2_inner(&v.c, &b.b) + half * &v.r * b.square();
    RationalMukaiVector { r: v.r.clone(), c, s }
}

/// `T = e^{2B} ∘ τ*` for the canonical B-field.
pub fn twist_t(v: &RationalMukaiVector) -> RationalMukaiVector {
    static TWO_B: OnceLock<BField> = OnceLock::new();
    let two_b = TWO_B.get_or_init(|| BField::canonical().scaled(&BigRational::from_integer(BigInt::from(2))));
    exp_b(two_b, &tau_star(v))
}

/// `T` written out directly: with `z3 = ae + bf`,
/// `T(r, x, y, z1, z2, z3, s) = (r, y, x, z2, z1, (r−a)e + (r−b)f, s − a − b + r)`.
pub fn twist_t_closed_form(v: &MukaiVector) -> MukaiVector {
    let a = &v.c[Z3.start];
    let b = &v.c[Z3.start + 1];
    let mut c = Vec::with_capacity(H2_RANK);
    c.extend_from_slice(&v.c[Y]);
    c.extend_from_slice(&v.c[X]);
    c.extend_from_slice(&v.c[Z2]);
    c.extend_from_slice(&v.c[Z1]);
    c.push(&v.r - a);
    c.push(&v.r - b);
    MukaiVector { r: v.r.clone(), c, s: &v.s - a - b + &v.r }
}

/// The 24×24 integral matrix of `T`, built column by column from [`twist_t`].
pub fn t_matrix() -> &'static Isometry {
    static T: OnceLock<Isometry> = OnceLock::new();
    T.get_or_init(|| {
        let cols: Vec<Vec<BigInt>> = (0..MUKAI_RANK)
            .map(|j| {
                let mut e = vec![BigInt::zero(); MUKAI_RANK];
                e[j] = BigInt::one();
                let image = twist_t(&MukaiVector::from_coords(&e).unwrap().to_rational());
                image.to_integral().expect("T is integral").to_coords()
            })
            .collect();
        let m = IntegerMatrix::from_columns(MUKAI_RANK, &cols).unwrap();
        Isometry::new(mukai_lattice(), m).expect("T preserves the Mukai pairing")
    })
}
