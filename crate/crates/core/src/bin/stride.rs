// temporary debug harness
use stride_core::env::{Environment, EnvParams, EpisodeSettings};
use stride_core::rng::{stream_rng, Stream};
use stride_core::terrain::TerrainKind;

fn main() {
    let kind: TerrainKind = std::env::args().nth(1).unwrap_or("flat".into()).parse().unwrap();
    let d: f64 = std::env::args().nth(2).unwrap_or("1".into()).parse().unwrap();
    let f: f64 = std::env::args().nth(3).unwrap_or("1".into()).parse().unwrap();
    let mut env = Environment::new(EnvParams::default()).unwrap();
    let mut wins = 0;
    let mut fractions = Vec::new();
    for seed in 0..10u64 {
        let settings = EpisodeSettings {
            kind,
            difficulty: d,
            instances: 2,
            terrain_seed: seed,
            guide_f: f,
            guide_joints: true,
            perturb_p: 0.0,
        };
        env.reset(&settings).unwrap();
        let mut rng = stream_rng(seed, Stream::Perturb);
        let outcome = loop {
            let out = env.step(&[0.0; 6], &mut rng).unwrap();
            if let Some(o) = out.done {
                break o;
            }
        };
        if outcome.success { wins += 1; }
        fractions.push((outcome.distance_fraction * 100.0).round());
        println!("seed {seed}: {:?} {:.0}% t={:.1}s", outcome.reason, outcome.distance_fraction * 100.0, env.state().t);
    }
    println!("kind={kind} d={d} f={f}: {wins}/10 success, fractions {fractions:?}");
}
