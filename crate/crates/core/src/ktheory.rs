//! Finitely generated abelian groups and the twisted Atiyah–Hirzebruch
//! computation of `K¹` for a compact complex surface.
//!
//! Through degree 4 the only possible differential out of the rows that
//! matter is `d₃: H⁰ → H³`. Untwisted, it vanishes on `H⁰` and `H¹`; twisted
//! by a torsion class `ᾱ ∈ H³` it sends `1 ↦ −ᾱ` and still vanishes on `H¹`.
//! So `E₄ = (k·H⁰, H¹, H², H³/ᾱ, H⁴)` with `k` the order of `ᾱ`, the sequence
//! degenerates there, and `K¹ = H¹ ⊕ H³/ᾱ` since `H¹` is free.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{smith_normal_form, IntegerMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KTheoryError {
    #[error("invariant factor {0} must be at least 2")]
    FactorTooSmall(BigInt),
    #[error("invariant factors {0} and {1} violate the divisibility chain")]
    BrokenChain(BigInt, BigInt),
    #[error("element has {found} coordinates, group has {expected} generators")]
    LengthMismatch { expected: usize, found: usize },
    #[error("class has infinite order; twisting classes must be torsion")]
    InfiniteOrder,
}

/// `Z^free_rank ⊕ Z/d₁ ⊕ ... ⊕ Z/d_k` with `2 ≤ d₁ | d₂ | ... | d_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FGAbelianGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

impl FGAbelianGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self, KTheoryError> {
        for d in &torsion {
            if d < &BigInt::from(2) {
                return Err(KTheoryError::FactorTooSmall(d.clone()));
            }
        }
        for w in torsion.windows(2) {
            if !w[1].is_multiple_of(&w[0]) {
                return Err(KTheoryError::BrokenChain(w[0].clone(), w[1].clone()));
            }
        }
        Ok(FGAbelianGroup { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        FGAbelianGroup { free_rank: 0, torsion: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        FGAbelianGroup { free_rank: rank, torsion: vec![] }
    }

    pub fn cyclic(order: impl Into<BigInt>) -> Self {
        Self::from_relations(1, &IntegerMatrix::from_vec(1, 1, vec![order.into()]).unwrap())
    }

    /// Cokernel of the row relations: `Z^generators / rowspan(relations)`.
    pub fn from_relations(generators: usize, relations: &IntegerMatrix) -> Self {
        assert_eq!(relations.cols(), generators, "relation width must match generator count");
        let (s, _, _) = smith_normal_form(relations);
        let diag: Vec<BigInt> =
            (0..relations.rows().min(generators)).map(|i| s[(i, i)].clone()).filter(|d| !d.is_zero()).collect();
        let free_rank = generators - diag.len();
        let torsion = diag.into_iter().filter(|d| !d.is_one()).collect();
        FGAbelianGroup { free_rank, torsion }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn num_generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.num_generators() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    /// One row `d_i·e_{free_rank + i}` per torsion generator.
    pub fn presentation(&self) -> IntegerMatrix {
        let n = self.num_generators();
        let mut m = IntegerMatrix::zeros(self.torsion.len(), n);
        for (i, d) in self.torsion.iter().enumerate() {
            m[(i, self.free_rank + i)] = d.clone();
        }
        m
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut diag: Vec<BigInt> = vec![BigInt::zero(); self.free_rank + other.free_rank];
        diag.extend(self.torsion.iter().cloned());
        diag.extend(other.torsion.iter().cloned());
        let n = diag.len();
        Self::from_relations(n, &IntegerMatrix::diagonal(&diag))
    }

    /// The subgroup `k·G`, which is `Z^f ⊕ ⨁ Z/(d_i / gcd(d_i, k))` for `k ≠ 0`.
    pub fn multiple(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::trivial();
        }
        let diag: Vec<BigInt> = std::iter::repeat_n(BigInt::zero(), self.free_rank)
            .chain(self.torsion.iter().map(|d| d / d.gcd(k)))
            .collect();
        Self::from_relations(diag.len(), &IntegerMatrix::diagonal(&diag))
    }
}

impl fmt::Display for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            n => parts.push(format!("Z^{n}")),
        }
        // Group equal factors: Z/2 + Z/2 prints as (Z/2)^2.
        let mut i = 0;
        while i < self.torsion.len() {
            let d = &self.torsion[i];
            let run = self.torsion[i..].iter().take_while(|x| *x == d).count();
            parts.push(if run == 1 { format!("Z/{d}") } else { format!("(Z/{d})^{run}") });
            i += run;
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Coordinates over a group's generators, free generators first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    coords: Vec<BigInt>,
}

impl GroupElement {
    /// Reduces the torsion coordinates into `[0, d_i)`.
    pub fn new(group: &FGAbelianGroup, coords: Vec<BigInt>) -> Result<Self, KTheoryError> {
        if coords.len() != group.num_generators() {
            return Err(KTheoryError::LengthMismatch { expected: group.num_generators(), found: coords.len() });
        }
        let mut coords = coords;
        for (c, d) in coords[group.free_rank..].iter_mut().zip(&group.torsion) {
            *c = c.mod_floor(d);
        }
        Ok(GroupElement { coords })
    }

    pub fn zero(group: &FGAbelianGroup) -> Self {
        GroupElement { coords: vec![BigInt::zero(); group.num_generators()] }
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn neg(&self, group: &FGAbelianGroup) -> Self {
        GroupElement::new(group, self.coords.iter().map(|c| -c).collect()).expect("same group")
    }

    /// `None` for elements of infinite order; the order of zero is 1.
    pub fn order(&self, group: &FGAbelianGroup) -> Option<BigInt> {
        if self.coords[..group.free_rank].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(
            self.coords[group.free_rank..]
                .iter()
                .zip(&group.torsion)
                .map(|(c, d)| d / c.gcd(d))
                .fold(BigInt::one(), |acc, o| acc.lcm(&o)),
        )
    }
}

/// `G / ⟨g⟩`, from the presentation of `G` with `g` appended as a relation.
pub fn quotient_by_element(group: &FGAbelianGroup, g: &GroupElement) -> Result<FGAbelianGroup, KTheoryError> {
    let n = group.num_generators();
    if g.coords.len() != n {
        return Err(KTheoryError::LengthMismatch { expected: n, found: g.coords.len() });
    }
    let row = IntegerMatrix::from_vec(1, n, g.coords.clone()).unwrap();
    let relations = group.presentation().vstack(&row).expect("widths agree");
    Ok(FGAbelianGroup::from_relations(n, &relations))
}

/// Integral cohomology `H⁰..H⁴` of a compact surface with a twisting class in `H³`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologySpec {
    pub h: [FGAbelianGroup; 5],
    pub alpha: GroupElement,
}

impl CohomologySpec {
    pub fn new(h: [FGAbelianGroup; 5], alpha_coords: Vec<BigInt>) -> Result<Self, KTheoryError> {
        let alpha = GroupElement::new(&h[3], alpha_coords)?;
        if alpha.order(&h[3]).is_none() {
            return Err(KTheoryError::InfiniteOrder);
        }
        Ok(CohomologySpec { h, alpha })
    }

    /// `Z, 0, Z^10 ⊕ Z/2, Z/2, Z`; `twisted` selects the nonzero class in `H³ = Z/2`.
    pub fn enriques(twisted: bool) -> Self {
        let h = [
            FGAbelianGroup::free(1),
            FGAbelianGroup::trivial(),
            FGAbelianGroup::new(10, vec![BigInt::from(2)]).unwrap(),
            FGAbelianGroup::cyclic(2),
            FGAbelianGroup::free(1),
        ];
        Self::new(h, vec![BigInt::from(u8::from(twisted))]).unwrap()
    }

    pub fn with_alpha(&self, alpha_coords: Vec<BigInt>) -> Result<Self, KTheoryError> {
        Self::new(self.h.clone(), alpha_coords)
    }

    /// Order of `ᾱ`, with the order of zero taken to be 1.
    pub fn alpha_order(&self) -> BigInt {
        self.alpha.order(&self.h[3]).expect("validated at construction")
    }

    pub fn is_twisted(&self) -> bool {
        !self.alpha.is_zero()
    }
}

/// `K¹ ≅ H¹ ⊕ H³/ᾱ`.
pub fn k1_surface(spec: &CohomologySpec) -> FGAbelianGroup {
    let quotient = quotient_by_element(&spec.h[3], &spec.alpha).expect("alpha validated against H3");
    spec.h[1].direct_sum(&quotient)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E4Page {
    /// Order of `ᾱ`; column 0 is `k·H⁰`.
    pub k: BigInt,
    pub columns: [FGAbelianGroup; 5],
    /// `d₃(1) = −ᾱ ∈ H³`.
    pub d3_image: GroupElement,
}

impl E4Page {
    /// Associated graded pieces of `K⁰`; the extension problem is left open.
    pub fn k0_graded(&self) -> [&FGAbelianGroup; 3] {
        [&self.columns[0], &self.columns[2], &self.columns[4]]
    }

    pub fn k1_graded(&self) -> [&FGAbelianGroup; 2] {
        [&self.columns[1], &self.columns[3]]
    }
}

pub fn e4_page(spec: &CohomologySpec) -> E4Page {
    let k = spec.alpha_order();
    let columns = [
        spec.h[0].multiple(&k),
        spec.h[1].clone(),
        spec.h[2].clone(),
        quotient_by_element(&spec.h[3], &spec.alpha).expect("alpha validated against H3"),
        spec.h[4].clone(),
    ];
    E4Page { k, columns, d3_image: spec.alpha.neg(&spec.h[3]) }
}

/// Problem with a cohomology spec file, naming the field at fault.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{field}: {message}")]
pub struct SpecFileError {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub coords: Vec<i64>,
}

/// On-disk form of a [`CohomologySpec`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CohomologySpecFile {
    pub h0: GroupFile,
    pub h1: GroupFile,
    pub h2: GroupFile,
    pub h3: GroupFile,
    pub h4: GroupFile,
    pub alpha: ElementFile,
}

impl CohomologySpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecFileError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SpecFileError {
                field: if path == "." { "<document>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn to_spec(&self) -> Result<CohomologySpec, SpecFileError> {
        let mut groups = Vec::with_capacity(5);
        for (i, g) in [&self.h0, &self.h1, &self.h2, &self.h3, &self.h4].into_iter().enumerate() {
            let torsion = g.torsion.iter().copied().map(BigInt::from).collect();
            let group = FGAbelianGroup::new(g.free_rank, torsion)
                .map_err(|e| SpecFileError { field: format!("h{i}.torsion"), message: e.to_string() })?;
            groups.push(group);
        }
        let h: [FGAbelianGroup; 5] = groups.try_into().expect("five groups");
        let coords = self.alpha.coords.iter().copied().map(BigInt::from).collect();
        CohomologySpec::new(h, coords)
            .map_err(|e| SpecFileError { field: "alpha.coords".into(), message: e.to_string() })
    }
}

impl CohomologySpec {
    pub fn from_json(text: &str) -> Result<Self, SpecFileError> {
        CohomologySpecFile::parse(text)?.to_spec()
    }
}

/// JSON-friendly view of a group: numbers when they fit, strings otherwise.
pub fn group_json(g: &FGAbelianGroup) -> serde_json::Value {
    let torsion: Vec<serde_json::Value> = g
        .torsion
        .iter()
        .map(|d| match d.to_i64() {
            Some(x) => serde_json::Value::from(x),
            None => serde_json::Value::from(d.to_string()),
        })
        .collect();
    serde_json::json!({
        "free_rank": g.free_rank,
        "torsion": torsion,
        "display": g.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn canonical_form_rejects_bad_factors() {
        assert_eq!(FGAbelianGroup::new(0, vec![b(1)]), Err(KTheoryError::FactorTooSmall(b(1))));
        assert_eq!(FGAbelianGroup::new(0, vec![b(2), b(3)]), Err(KTheoryError::BrokenChain(b(2), b(3))));
        assert!(FGAbelianGroup::new(3, vec![b(2), b(6)]).is_ok());
    }

    #[test]
    fn relations_are_canonicalized() {
        let g = FGAbelianGroup::from_relations(2, &IntegerMatrix::diagonal(&[2, 3]));
        assert_eq!(g, FGAbelianGroup::cyclic(6));
        let z2z3 = FGAbelianGroup::cyclic(2).direct_sum(&FGAbelianGroup::cyclic(3));
        assert_eq!(z2z3, FGAbelianGroup::cyclic(6));
        assert_eq!(FGAbelianGroup::cyclic(1), FGAbelianGroup::trivial());
        assert_eq!(FGAbelianGroup::cyclic(0), FGAbelianGroup::free(1));
    }

    #[test]
    fn quotient_of_z2_by_generator_is_trivial() {
        let g = FGAbelianGroup::cyclic(2);
        let one = GroupElement::new(&g, vec![b(1)]).unwrap();
        assert_eq!(quotient_by_element(&g, &one).unwrap(), FGAbelianGroup::trivial());
    }

    #[test]
    fn quotient_of_z_by_two() {
        let g = FGAbelianGroup::free(1);
        let two = GroupElement::new(&g, vec![b(2)]).unwrap();
        assert_eq!(quotient_by_element(&g, &two).unwrap(), FGAbelianGroup::cyclic(2));
    }

    #[test]
    fn quotient_by_zero_is_identity() {
        let g = FGAbelianGroup::new(10, vec![b(2), b(4)]).unwrap();
        assert_eq!(quotient_by_element(&g, &GroupElement::zero(&g)).unwrap(), g);
    }

    #[test]
    fn quotient_rejects_wrong_length() {
        let g = FGAbelianGroup::cyclic(2);
        let bad = GroupElement { coords: vec![b(1), b(0)] };
        assert_eq!(quotient_by_element(&g, &bad), Err(KTheoryError::LengthMismatch { expected: 1, found: 2 }));
    }

    #[test]
    fn element_order_and_reduction() {
        let g = FGAbelianGroup::new(1, vec![b(4), b(12)]).unwrap();
        let e = GroupElement::new(&g, vec![b(0), b(-2), b(3)]).unwrap();
        assert_eq!(e.coords(), &[b(0), b(2), b(3)]);
        assert_eq!(e.order(&g), Some(b(4)));
        let free = GroupElement::new(&g, vec![b(1), b(0), b(0)]).unwrap();
        assert_eq!(free.order(&g), None);
        assert_eq!(GroupElement::zero(&g).order(&g), Some(b(1)));
    }

    #[test]
    fn enriques_k1_dichotomy() {
        assert_eq!(k1_surface(&CohomologySpec::enriques(false)), FGAbelianGroup::cyclic(2));
        assert_eq!(k1_surface(&CohomologySpec::enriques(true)), FGAbelianGroup::trivial());
    }

    #[test]
    fn untwisted_free_surface() {
        let h = [
            FGAbelianGroup::free(1),
            FGAbelianGroup::free(4),
            FGAbelianGroup::free(6),
            FGAbelianGroup::free(4),
            FGAbelianGroup::free(1),
        ];
        let spec = CohomologySpec::new(h, vec![BigInt::zero(); 4]).unwrap();
        assert_eq!(k1_surface(&spec), FGAbelianGroup::free(8));
    }

    #[test]
    fn infinite_order_alpha_rejected() {
        let h = [
            FGAbelianGroup::free(1),
            FGAbelianGroup::free(4),
            FGAbelianGroup::free(6),
            FGAbelianGroup::free(4),
            FGAbelianGroup::free(1),
        ];
        assert_eq!(CohomologySpec::new(h, vec![b(1), b(0), b(0), b(0)]), Err(KTheoryError::InfiniteOrder));
    }

    #[test]
    fn e4_pages_for_enriques() {
        let twisted = e4_page(&CohomologySpec::enriques(true));
        assert_eq!(twisted.k, b(2));
        assert_eq!(twisted.columns[0], FGAbelianGroup::free(1));
        assert_eq!(twisted.columns[1], FGAbelianGroup::trivial());
        assert_eq!(twisted.columns[2].to_string(), "Z^10 + Z/2");
        assert_eq!(twisted.columns[3], FGAbelianGroup::trivial());
        assert_eq!(twisted.columns[4], FGAbelianGroup::free(1));
        // -ᾱ = ᾱ in Z/2.
        assert_eq!(twisted.d3_image.coords(), &[b(1)]);

        let plain = e4_page(&CohomologySpec::enriques(false));
        assert_eq!(plain.k, b(1));
        assert_eq!(plain.columns[3], FGAbelianGroup::cyclic(2));
        assert!(plain.d3_image.is_zero());
    }

    #[test]
    fn k3_like_spec_has_trivial_k1() {
        let h = [
            FGAbelianGroup::free(1),
            FGAbelianGroup::trivial(),
            FGAbelianGroup::free(22),
            FGAbelianGroup::trivial(),
            FGAbelianGroup::free(1),
        ];
        let spec = CohomologySpec::new(h, vec![]).unwrap();
        assert_eq!(k1_surface(&spec), FGAbelianGroup::trivial());
        assert_eq!(e4_page(&spec).k, b(1));
    }

    #[test]
    fn multiple_of_torsion_group() {
        let g = FGAbelianGroup::new(1, vec![b(2), b(12)]).unwrap();
        assert_eq!(g.multiple(&b(2)), FGAbelianGroup::new(1, vec![b(6)]).unwrap());
        assert_eq!(g.multiple(&b(1)), g);
    }

    #[test]
    fn display_forms() {
        assert_eq!(FGAbelianGroup::trivial().to_string(), "0");
        assert_eq!(FGAbelianGroup::free(1).to_string(), "Z");
        assert_eq!(FGAbelianGroup::new(0, vec![b(2), b(2), b(4)]).unwrap().to_string(), "(Z/2)^2 + Z/4");
    }

    #[test]
    fn spec_file_errors_name_the_field() {
        let bad_type = r#"{"h0":{"free_rank":1,"torsion":[]},"h1":{"free_rank":0,"torsion":[]},
            "h2":{"free_rank":10,"torsion":["two"]},"h3":{"free_rank":0,"torsion":[2]},
            "h4":{"free_rank":1,"torsion":[]},"alpha":{"coords":[1]}}"#;
        let err = CohomologySpec::from_json(bad_type).unwrap_err();
        assert_eq!(err.field, "h2.torsion[0]");

        let missing = r#"{"h0":{"free_rank":1,"torsion":[]}}"#;
        let err = CohomologySpec::from_json(missing).unwrap_err();
        assert!(err.message.contains("h1"), "{err}");

        let bad_chain = r#"{"h0":{"free_rank":1,"torsion":[]},"h1":{"free_rank":0,"torsion":[]},
            "h2":{"free_rank":10,"torsion":[2]},"h3":{"free_rank":0,"torsion":[2,3]},
            "h4":{"free_rank":1,"torsion":[]},"alpha":{"coords":[1,0]}}"#;
        assert_eq!(CohomologySpec::from_json(bad_chain).unwrap_err().field, "h3.torsion");

        let bad_alpha = r#"{"h0":{"free_rank":1,"torsion":[]},"h1":{"free_rank":0,"torsion":[]},
            "h2":{"free_rank":10,"torsion":[2]},"h3":{"free_rank":0,"torsion":[2]},
            "h4":{"free_rank":1,"torsion":[]},"alpha":{"coords":[1,1]}}"#;
        assert_eq!(CohomologySpec::from_json(bad_alpha).unwrap_err().field, "alpha.coords");
    }
}
