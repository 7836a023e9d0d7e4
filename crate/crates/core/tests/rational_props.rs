use ccp_core::Rational;
use num_rational::Ratio;
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = (i64, i64)> {
    (-1_000_000i64..=1_000_000, 1i64..=1_000_000)
}

fn both((n, d): (i64, i64)) -> (Rational, Ratio<i128>) {
    (Rational::new(n as i128, d as i128).unwrap(), Ratio::new(n as i128, d as i128))
}

fn same(a: Rational, b: Ratio<i128>) -> bool {
    a.numer() == *b.numer() && a.denom() == *b.denom()
}

proptest! {
    #[test]
    fn arithmetic_matches_reference(x in pair(), y in pair()) {
        let (a, ra) = both(x);
        let (b, rb) = both(y);
        prop_assert!(same(a, ra));
        prop_assert!(same(a + b, ra + rb));
        prop_assert!(same(a - b, ra - rb));
        prop_assert!(same(a * b, ra * rb));
        prop_assert!(same(-a, -ra));
    }

    #[test]
    fn ordering_matches_reference(x in pair(), y in pair()) {
        let (a, ra) = both(x);
        let (b, rb) = both(y);
        prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
        prop_assert_eq!(a == b, ra == rb);
    }

    #[test]
    fn ordering_without_overflow(n1 in any::<i64>(), d1 in 1i64..=i64::MAX, n2 in any::<i64>(), d2 in 1i64..=i64::MAX) {
        let a = Rational::new(n1 as i128 * 3, d1 as i128).unwrap();
        let b = Rational::new(n2 as i128 * 3, d2 as i128).unwrap();
        let ra = Ratio::new(num_bigint::BigInt::from(n1) * 3, num_bigint::BigInt::from(d1));
        let rb = Ratio::new(num_bigint::BigInt::from(n2) * 3, num_bigint::BigInt::from(d2));
        prop_assert_eq!(a.cmp(&b), ra.cmp(&rb));
    }

    #[test]
    fn sums_match_reference(xs in prop::collection::vec((0i64..100, 1i64..60), 0..20)) {
        let ours: Rational = xs.iter().map(|&p| both(p).0).sum();
        let theirs = xs.iter().fold(Ratio::new(0i128, 1), |acc, &p| acc + both(p).1);
        prop_assert!(same(ours, theirs));
    }
}

#[test]
fn zero_denominator_is_rejected() {
    assert!(Rational::new(1, 0).is_err());
}
