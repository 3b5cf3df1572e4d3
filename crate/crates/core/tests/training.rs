use motmask::mot::{GatingNetwork, MoTBlock};
use motmask::numerics::SeededRng;
use motmask::training::{gen_toy_task, run_toy, specialization_report, ToyRunConfig};

#[test]
fn single_category_fills_one_histogram_row() {
    let mut task = gen_toy_task(2, 5, 16, 4).unwrap();
    task.samples.retain(|s| s.category == 0);
    let cfg = ToyRunConfig::default();
    let mut model = cfg.model.clone();
    model.d_model = 16;
    let mut block = MoTBlock::init(&model).unwrap();
    block.gate = GatingNetwork::random(
        16,
        model.gate_hidden,
        model.n_experts,
        &mut SeededRng::new(1),
    );
    let r = specialization_report(&block, &task).unwrap();
    let totals: Vec<usize> = r
        .per_category_expert_histogram
        .iter()
        .map(|row| row.iter().sum())
        .collect();
    assert_eq!(totals, vec![5, 0]);
    assert!(r.mean_routing_entropy >= 0.0 && r.mean_routing_entropy <= (8f64).ln());
}

#[test]
fn toy_run_keeps_entropy_in_range_and_backbone_frozen() {
    let cfg = ToyRunConfig {
        steps: 40,
        per_category: 4,
        ..ToyRunConfig::default()
    };
    let run = run_toy(&cfg).unwrap();
    let fresh = MoTBlock::init(&motmask::mot::MotConfig {
        seed: motmask::numerics::mix_seed(cfg.seed, &[cfg.model.seed]),
        ..cfg.model.clone()
    })
    .unwrap();
    for slot in motmask::mot::LinearSlot::ALL {
        assert_eq!(run.block.linear(slot).w0, fresh.linear(slot).w0);
    }
    let ln_n = (cfg.model.n_experts as f64).ln();
    for r in [&run.initial_report, &run.final_report] {
        assert!((0.0..=ln_n + 1e-12).contains(&r.mean_routing_entropy));
        for row in &r.per_category_expert_histogram {
            assert_eq!(row.iter().sum::<usize>(), 4);
        }
    }
}
