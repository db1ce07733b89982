use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;

use twisted_mukai::mukai::{mukai_lattice, t_matrix, MukaiVector, MUKAI_RANK};
use twisted_mukai::verifier::{
    claim1_violation, claim2_violation, invariant_sublattice, l_plus_tl, phi_violation, sample_equivariant_isometry,
    tau_pairing_closed_form, Claim2Params,
};

fn e8_oracle(u: &[i64], v: &[i64]) -> i64 {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    let mut acc: i64 = (0..8).map(|i| 2 * u[i] * v[i]).sum();
    for (a, b) in edges {
        acc -= u[a] * v[b] + u[b] * v[a];
    }
    acc
}

fn hyp(u: &[i64], v: &[i64]) -> i64 {
    u[0] * v[1] + u[1] * v[0]
}

fn add(u: &[i64], v: &[i64]) -> Vec<i64> {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

fn bigs(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn point() -> Vec<BigInt> {
    MukaiVector::point().to_coords()
}

fn pair(u: &[BigInt], v: &[BigInt]) -> BigInt {
    mukai_lattice().inner_coords(u, v).unwrap()
}

fn invariant_vector(coeffs: &[i64]) -> Vec<BigInt> {
    invariant_sublattice().embed(&bigs(coeffs))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn claim1_holds_and_matches_oracle(l in prop::collection::vec(-100_000i64..=100_000, 22)) {
        let lb = bigs(&l);
        prop_assert_eq!(claim1_violation(&lb), None);
        let (x, y, z1, z2, z3) = (&l[0..8], &l[8..16], &l[16..18], &l[18..20], &l[20..22]);
        let formula = -2 * e8_oracle(x, y) + 2 * hyp(z1, z2) - hyp(z3, z3);
        prop_assert_eq!(tau_pairing_closed_form(&lb), BigInt::from(formula));
        // ℓ + Tℓ = (0, x+y, x+y, z1+z2, z1+z2, 0, −a−b), whose square is 2(x+y)² + 2(z1+z2)².
        let (xy, zz) = (add(x, y), add(z1, z2));
        let square = -2 * e8_oracle(&xy, &xy) + 2 * hyp(&zz, &zz);
        prop_assert_eq!(l_plus_tl(&lb).square(), BigInt::from(square));
        prop_assert_eq!(square.mod_floor(&4), 0);
    }

    #[test]
    fn claim2_family_closed_forms(a in -1000i64..=1000, x in prop::collection::vec(-1000i64..=1000, 8),
                                  z1 in prop::collection::vec(-1000i64..=1000, 2), s in -1000i64..=1000) {
        let p = Claim2Params { a: a.into(), x: bigs(&x), z1: bigs(&z1), s: s.into() };
        let v = p.vector();
        prop_assert_eq!(claim2_violation(&v, Some(&p)), None);
        let square = 2 * -e8_oracle(&x, &x) + 2 * hyp(&z1, &z1) + 2 * a * a - 4 * a * s;
        prop_assert_eq!(v.square(), BigInt::from(square));
        prop_assert_eq!(pair(&point(), &v.to_coords()), BigInt::from(-2 * a));
        prop_assert_eq!(t_matrix().matrix().mul_vec(&v.to_coords()).unwrap(), v.to_coords());
    }

    #[test]
    fn claim2_on_invariant_lattice(c in prop::collection::vec(-1000i64..=1000, 12)) {
        let v = invariant_vector(&c);
        prop_assert_eq!(t_matrix().matrix().mul_vec(&v).unwrap(), v.clone());
        let lhs = pair(&point(), &v);
        let rhs = pair(&v, &v);
        prop_assert!((lhs - rhs).mod_floor(&BigInt::from(4)).is_zero());
        prop_assert_eq!(claim2_violation(&MukaiVector::from_coords(&v).unwrap(), None), None);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn claim2_survives_equivariant_isometries(seed in any::<u64>(), c in prop::collection::vec(-50i64..=50, 12)) {
        let phi = sample_equivariant_isometry(seed, 8).unwrap().into_matrix();
        let v = invariant_vector(&c);
        let pv = phi.mul_vec(&v).unwrap();
        let pp = phi.mul_vec(&point()).unwrap();
        prop_assert!((pair(&pp, &pv) - pair(&pv, &pv)).mod_floor(&BigInt::from(4)).is_zero());
        // φ preserves L+, so φv is again T-invariant.
        prop_assert_eq!(t_matrix().matrix().mul_vec(&pv).unwrap(), pv);
    }

    #[test]
    fn sampled_isometries_pass_integrality(seed in any::<u64>(), ls in prop::collection::vec(prop::collection::vec(-50i64..=50, 22), 1..=5)) {
        let phi = sample_equivariant_isometry(seed, 8).unwrap();
        let ls: Vec<Vec<BigInt>> = ls.iter().map(|l| bigs(l)).collect();
        prop_assert_eq!(phi_violation(phi.matrix(), &ls), None);
        prop_assert_eq!(phi.matrix().rows(), MUKAI_RANK);
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>(), len in 0u32..=8) {
        prop_assert_eq!(sample_equivariant_isometry(seed, len).unwrap(), sample_equivariant_isometry(seed, len).unwrap());
    }
}

#[test]
fn phi_violation_rejects_non_equivariant_maps() {
    // Swapping r and s is an isometry of the Mukai lattice but does not commute with T.
    let mut m = twisted_mukai::linalg::IntegerMatrix::identity(MUKAI_RANK);
    m[(0, 0)] = BigInt::zero();
    m[(23, 23)] = BigInt::zero();
    m[(0, 23)] = BigInt::from(1);
    m[(23, 0)] = BigInt::from(1);
    assert!(twisted_mukai::lattice::is_isometry(mukai_lattice(), &m).unwrap());
    let msg = phi_violation(&m, &[]).expect("not equivariant");
    assert!(msg.contains("commute"), "{msg}");
}
