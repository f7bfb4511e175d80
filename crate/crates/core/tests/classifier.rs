use lectureseg::classifier::TreeNode;
use lectureseg::synth::{self, ALL_RULES};
use lectureseg::{classify, classify_traced, Config, MediaType, Raster, Rule};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Block = (u32, u32, u32, u32, [u8; 3]);

fn raster_from(width: u32, height: u32, background: [u8; 3], blocks: &[Block]) -> Raster {
    let mut r = Raster::filled(width, height, background);
    for &(x, y, w, h, c) in blocks {
        let x = x % width;
        let y = y % height;
        r.fill_rect(x, y, w.min(width - x), h.min(height - y), c);
    }
    r
}

fn arb_raster() -> impl Strategy<Value = Raster> {
    (
        64u32..160,
        48u32..120,
        any::<[u8; 3]>(),
        prop::collection::vec((any::<u32>(), any::<u32>(), 1u32..80, 1u32..60, any::<[u8; 3]>()), 0..12),
    )
        .prop_map(|(w, h, bg, blocks)| raster_from(w, h, bg, &blocks))
}

fn step_two(rule: Rule) -> bool {
    matches!(rule, Rule::GreenPodium | Rule::GreenBoardLowerBorder | Rule::GreenBoardCompleteBorder)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_and_deterministic(r in arb_raster()) {
        let cfg = Config::default();
        let a = classify_traced(&r, None, &cfg);
        let b = classify_traced(&r.clone(), None, &cfg);
        prop_assert_eq!(&a, &b);
        prop_assert!(MediaType::ALL.contains(&a.media_type));
        prop_assert!(!matches!(a.media_type, MediaType::Ppt | MediaType::Class));
        prop_assert_eq!(a.visited[0], TreeNode::ExternalLabel);
    }

    #[test]
    fn dark_frames_skip_later_steps(r in arb_raster()) {
        let cfg = Config::default();
        let t = classify_traced(&r, None, &cfg);
        if t.rule == Rule::DarkOrBlackBorder {
            prop_assert_eq!(t.visited, vec![TreeNode::ExternalLabel, TreeNode::DarkOrBorder]);
        } else {
            prop_assert!(t.visited.contains(&TreeNode::Green));
        }
    }

    #[test]
    fn adding_green_never_leaves_the_green_step(
        seed in any::<u64>(),
        podium in any::<bool>(),
        blocks in prop::collection::vec((any::<u32>(), any::<u32>(), 1u32..120, 1u32..80), 1..8),
    ) {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut r = if podium { synth::podium_frame(&mut rng) } else { synth::tray_board_frame(&mut rng) };
        prop_assume!(step_two(classify_traced(&r, None, &cfg).rule));
        let (w, h) = (r.width(), r.height());
        for (x, y, bw, bh) in blocks {
            let (x, y) = (x % w, y % h);
            r.fill_rect(x, y, bw.min(w - x), bh.min(h - y), synth::BOARD_GREEN);
            let t = classify_traced(&r, None, &cfg);
            prop_assert!(step_two(t.rule), "demoted to {:?}", t.rule);
        }
    }
}

#[test]
fn every_rule_fixture_fires_its_own_path() {
    let cfg = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for rule in ALL_RULES {
        for _ in 0..3 {
            let (r, label) = synth::frame_for_rule(rule, &mut rng);
            let t = classify_traced(&r, label, &cfg);
            assert_eq!(t.rule, rule);
            assert_eq!(t.media_type, synth::expected_media(rule));
        }
    }
}

#[test]
fn reference_examples() {
    let cfg = Config::default();
    let green = synth::BOARD_GREEN;
    let podium = Raster::from_fn(320, 240, |_, y| if y < 216 { green } else { [120, 80, 50] });
    assert_eq!(classify(&podium, None, &cfg), MediaType::Podium);

    let bars = Raster::from_fn(320, 240, |_, y| {
        if [30, 110, 190].iter().any(|&b| (b..b + 6).contains(&y)) {
            [15, 15, 15]
        } else {
            [255, 255, 255]
        }
    });
    assert_eq!(classify(&bars, None, &cfg), MediaType::Computer);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sheet = Raster::filled(320, 240, [255, 255, 255]);
    let ink = synth::text_content(&mut rng, 320, 240, synth::Rect::new(20, 20, 280, 200), 40);
    for y in 0..240 {
        for x in 0..320 {
            if ink.get(x, y) {
                sheet.set(x, y, synth::INK);
            }
        }
    }
    assert_eq!(classify(&sheet, None, &cfg), MediaType::Sheet);

    assert_eq!(classify(&synth::illustration_frame(&mut rng), None, &cfg), MediaType::Illustration);
}

#[test]
fn labels_override_pixels() {
    let cfg = Config::default();
    let r = Raster::filled(320, 240, [0, 0, 0]);
    assert_eq!(classify(&r, Some("ppt"), &cfg), MediaType::Ppt);
    assert_eq!(classify(&r, Some("CLASS"), &cfg), MediaType::Class);
    assert_eq!(classify(&r, Some("board"), &cfg), MediaType::Computer);
}
