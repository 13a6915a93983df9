use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use sphgreen::DDReal;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

fn dd_exact(x: DDReal) -> BigRational {
    exact(x.hi()) + exact(x.lo())
}

fn pow10(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(10).pow(n))
}

/// Relative agreement with `want` to `digits` significant digits.
fn agrees(got: DDReal, want: &BigRational, digits: u32) -> bool {
    if want.is_zero() {
        return dd_exact(got).is_zero();
    }
    (dd_exact(got) - want).abs() * pow10(digits) <= want.abs()
}

fn dd() -> impl Strategy<Value = DDReal> {
    (-300i32..300, 1.0f64..2.0, any::<bool>(), -0.5f64..0.5).prop_map(|(e, m, neg, t)| {
        let hi = if neg { -m } else { m } * 2f64.powi(e);
        DDReal::new(hi, hi * t * f64::EPSILON)
    })
}

fn close_pair() -> impl Strategy<Value = (DDReal, DDReal)> {
    (dd(), -1e-10f64..1e-10).prop_map(|(a, d)| (a, a * DDReal::from_f64(1.0 + d)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, ..ProptestConfig::default() })]

    #[test]
    fn field_ops_match_rationals(a in dd(), b in dd()) {
        let (ea, eb) = (dd_exact(a), dd_exact(b));
        prop_assert!(agrees(a + b, &(&ea + &eb), 29));
        prop_assert!(agrees(a - b, &(&ea - &eb), 29));
        prop_assert!(agrees(a * b, &(&ea * &eb), 29));
        prop_assert!(agrees(a / b, &(&ea / &eb), 29));
    }

    #[test]
    fn cancelling_subtraction((a, b) in close_pair()) {
        let want = dd_exact(a) - dd_exact(b);
        prop_assert!(agrees(a - b, &want, 29));
    }

    #[test]
    fn mixed_ops(a in dd(), x in -1e6f64..1e6) {
        prop_assume!(x != 0.0);
        let (ea, ex) = (dd_exact(a), exact(x));
        prop_assert!(agrees(a.add_f64(x), &(&ea + &ex), 29));
        prop_assert!(agrees(a.mul_f64(x), &(&ea * &ex), 29));
        prop_assert!(agrees(a.div_f64(x), &(&ea / &ex), 29));
    }

    #[test]
    fn associativity_defect(a in dd(), b in dd(), c in dd()) {
        let l = dd_exact((a + b) + c);
        let r = dd_exact(a + (b + c));
        let big = [a, b, c].iter().map(|x| x.hi().abs()).fold(0.0, f64::max);
        let bound = exact(big) / BigRational::from_integer(BigInt::one() << 100);
        prop_assert!((l - r).abs() <= bound);
    }

    #[test]
    fn double_round_trip(x in any::<f64>()) {
        prop_assume!(x.is_finite());
        prop_assert_eq!(DDReal::from_f64(x).to_f64().to_bits(), x.to_bits());
    }

    #[test]
    fn normalized(a in dd(), b in dd()) {
        for v in [a + b, a * b, a / b] {
            prop_assert_eq!(v.hi() + v.lo(), v.hi());
        }
    }
}

#[test]
fn tenth_summed_ten_thousand_times() {
    let mut s = DDReal::ZERO;
    for _ in 0..10_000 {
        s += DDReal::from_f64(0.1);
    }
    let want = exact(0.1) * BigRational::from_integer(10_000.into());
    assert!(agrees(s, &want, 30));
    // in double the same loop is off in the 13th digit
    let mut d = 0.0;
    for _ in 0..10_000 {
        d += 0.1;
    }
    assert!((d - 1000.0).abs() > 1e-11);
}

#[test]
fn one_third() {
    let third = DDReal::ONE / DDReal::from_f64(3.0);
    let want = BigRational::new(1.into(), 3.into());
    assert!(agrees(third, &want, 31));
    let back = third * DDReal::from_f64(3.0) - DDReal::ONE;
    assert!(back.hi().abs() < 1e-31);
}

#[test]
fn log_two() {
    // 0.69314718055994530941723212145817656807550013436025...
    let digits = "69314718055994530941723212145817656807550013436025";
    let want = BigRational::new(digits.parse().unwrap(), BigInt::from(10).pow(50));
    assert!(agrees(DDReal::LN_2, &want, 31));
    assert!(agrees(DDReal::from_f64(2.0).ln(), &want, 31));
}

#[test]
fn pi() {
    let digits = "314159265358979323846264338327950288419716939937510";
    let want = BigRational::new(digits.parse().unwrap(), BigInt::from(10).pow(50));
    assert!(agrees(DDReal::PI, &want, 31));
}
