use cmce::format::{pack_message, unpack_message};
use cmce::{Field, FieldElement, FieldSpec};
use proptest::prelude::*;

fn gf256() -> Field {
    Field::gf256()
}

proptest! {
    #[test]
    fn field_axioms(a in 0u16..256, b in 0u16..256, c in 0u16..256) {
        let f = gf256();
        let (a, b, c) = (FieldElement(a), FieldElement(b), FieldElement(c));
        prop_assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        if !b.is_zero() {
            prop_assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
        }
    }

    #[test]
    fn prime_field_inverse(p in prop::sample::select(vec![3u32, 5, 7, 251, 65521]), x in 1u32..65521) {
        let f = Field::new(FieldSpec::prime(p).unwrap());
        let a = f.from_int((x % p) as i64);
        prop_assume!(!a.is_zero());
        prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.from_int(1));
    }

    #[test]
    fn message_packing_roundtrip(bytes in prop::collection::vec(any::<u8>(), 0..300), q in prop::sample::select(vec![2u32, 3, 8, 13, 256, 4096]), k in 1usize..20) {
        let spec = FieldSpec::with_order(q).unwrap();
        let u = pack_message(&bytes, &spec, k);
        prop_assert!(!u.is_empty());
        prop_assert_eq!(unpack_message(&u, &spec, bytes.len() as u64).unwrap(), bytes);
    }
}
