//! Forward / forward+backward throughput of the default networks.
//!
//! `cargo run --release -p lognav-nn --example bench`

use std::time::Instant;

use lognav_nn::{Cache, NetSpec, PolicyNet};

fn main() {
    let mut small = NetSpec::for_frames(3, 48, 48);
    small.conv_channels = vec![16, 32, 32];
    small.hidden = 256;
    for spec in [NetSpec::for_frames(3, 48, 48), small, NetSpec::for_frames(3, 1, 48)] {
        let p = PolicyNet::<f32>::new(&spec, -0.5, 0).unwrap();
        for b in [1usize, 64, 256] {
            let maps = vec![0.5f32; b * spec.input_len()];
            let goals = vec![0.1f32; b * 3];
            let mut c = Cache::default();
            let reps = (256 / b).max(1);
            let t = Instant::now();
            for _ in 0..reps {
                p.forward(&maps, &goals, b, &mut c);
            }
            let fwd = t.elapsed().as_secs_f64() / (reps * b) as f64;
            let mut g = p.params.zeros_like();
            let d = vec![0.01f32; b * 2];
            let t = Instant::now();
            for _ in 0..reps {
                p.forward(&maps, &goals, b, &mut c);
                p.backward(&c, &d, [0.0, 0.0], &mut g);
            }
            let fb = t.elapsed().as_secs_f64() / (reps * b) as f64;
            println!(
                "{}x{} {:?}/{} batch {b}: fwd {:.3} ms/sample, fwd+bwd {:.3} ms/sample",
                spec.height,
                spec.width,
                spec.conv_channels,
                spec.hidden,
                fwd * 1e3,
                fb * 1e3
            );
        }
    }
}
