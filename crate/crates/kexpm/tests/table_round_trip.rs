use kexpm::table::{read_records, write_records};
use kexpm_core::bounds::ConvergenceRecord;
use proptest::prelude::*;

fn bound() -> impl Strategy<Value = f64> {
    prop_oneof![Just(f64::INFINITY), Just(0.0), any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(f64::abs)]
}

fn record() -> impl Strategy<Value = ConvergenceRecord> {
    (1usize..500, proptest::option::of(bound()), bound(), bound(), 0.0f64..1.0, proptest::option::of(bound()), proptest::option::of(bound()))
        .prop_map(|(k, err_true, est_post, bnd_prior, q_used, bnd_saad, bnd_hl)| ConvergenceRecord {
            k,
            err_true,
            est_post,
            bnd_prior,
            q_used,
            bnd_saad,
            bnd_hl,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rows_parse_back_exactly(rows in proptest::collection::vec(record(), 0..40)) {
        let mut buf = Vec::new();
        write_records(&rows, &mut buf).unwrap();
        let back = read_records(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(a, b);
            prop_assert_eq!(a.bnd_prior.to_bits(), b.bnd_prior.to_bits());
        }
        let mut again = Vec::new();
        write_records(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}
