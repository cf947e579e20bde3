use lusin_core::fiber::*;
use lusin_core::games::{BasicNestingII, StrictWrapper};
use lusin_core::seqcore::FinSeq;
use proptest::prelude::*;
use std::time::Instant;

#[test]
fn depth_ten_certificate() {
    let t = Instant::now();
    let state = amplify(10, &BasicNestingII, &StrictWrapper::new(Box::new(BasicNestingII))).unwrap();
    let cert = verify_amplifier(&state).unwrap();
    eprintln!("depth 10 in {:?}", t.elapsed());
    assert_eq!(cert.stems.len(), 1024);
    assert!(cert.stems.iter().all(|s| even_map_basic_image(s) == cert.image));
    for w in cert.stems.windows(2) {
        assert!(disjoint(&w[0], &w[1]));
    }
}

#[test]
fn every_level_is_a_cover() {
    let state = amplify(5, &BasicNestingII, &BasicNestingII).unwrap();
    for (k, lv) in state.levels.iter().enumerate() {
        assert_eq!(lv.w.len(), 1 << k);
        let c = Cover { target: lv.w_tilde.clone(), pieces: lv.w.clone() };
        c.check().unwrap();
    }
}

fn stem() -> impl Strategy<Value = FinSeq> {
    prop::collection::vec(0u64..4, 0..7).prop_map(FinSeq::from_digits)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn image_of_pullback_is_target(s in stem(), extra in prop::collection::vec(0u64..4, 0..4)) {
        let img = even_map_basic_image(&s);
        let t = img.concat(&FinSeq::from_digits(extra));
        let u = pullback(&s, &t).unwrap();
        prop_assert!(within(&u, &s));
        prop_assert_eq!(even_map_basic_image(&u), t);
    }

    #[test]
    fn refinements_keep_covers(ops in prop::collection::vec((0u8..4, 0usize..8, 0u64..3), 1..8)) {
        let mut cover = Cover::full();
        for (op, k, d) in ops {
            let k = k % cover.pieces.len();
            let dir = match op {
                0 => Directive::Split(k),
                1 => Directive::SplitAll,
                2 => Directive::ShrinkPiece(k, cover.pieces[k].extend(d)),
                _ => Directive::ShrinkTarget(cover.target.extend(d)),
            };
            if cover.pieces.len() > 64 && op == 1 {
                continue;
            }
            let (next, _) = refine(&cover, &dir).unwrap();
            next.check().unwrap();
            cover = next;
        }
    }
}
