use chaosedge::data::synthetic::{synthetic_dataset, SyntheticSpec};
use chaosedge::net::InitSpec;
use chaosedge::numerics::ols::ols_fit;
use chaosedge::train::{train_with_options, HyperParams, TrainOptions};
use std::time::Instant;

fn main() {
    let spec = SyntheticSpec::default(); // 600/class train, 100/class test
    let t0 = Instant::now();
    let (train_ds, test_ds) = synthetic_dataset(&spec).unwrap();
    println!("data: {} train / {} test, dim {} ({:.1}s)", train_ds.n_samples(), test_ds.n_samples(), train_ds.dim(), t0.elapsed().as_secs_f64());

    let hyper = HyperParams { eta: 0.01, alpha: 0.0, batch: 32, lambda: 0.0, epochs: 600, seed: 1 };
    let options = TrainOptions { stop_at_j2: Some(1.1), ..Default::default() };
    let t0 = Instant::now();
    let out = train_with_options(&train_ds, &test_ds, &hyper, InitSpec::ordered_default(784), &options).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    let run = &out.run;
    println!("epochs run: {} in {:.1}s ({:.2} s/epoch)", run.records.len()-1, dt, dt / (run.records.len()-1) as f64);
    for r in run.records.iter().step_by(20) {
        println!("  ep {:3}  j2={:.4}  j0={:+.4}  train={:.4} test={:.4} acc={:.4}", r.epoch, r.j_squared, r.j0, r.train_loss, r.test_loss, r.test_accuracy);
    }
    let last = run.records.last().unwrap();
    println!("  last ep {} j2={:.4} test={:.4} acc={:.4}", last.epoch, last.j_squared, last.test_loss, last.test_accuracy);
    let ordered: Vec<&_> = run.records.iter().filter(|r| r.j_squared < 1.0).collect();
    let xs: Vec<f64> = ordered.iter().map(|r| r.epoch as f64).collect();
    let ys: Vec<f64> = ordered.iter().map(|r| r.j_squared).collect();
    let fit = ols_fit(&xs, &ys).unwrap();
    let d = fit.slope * (1.0 - hyper.alpha) * hyper.batch as f64 / hyper.eta;
    println!("ordered points: {}  A={:.6}  C={:.4}  r2={:.6}  D={:.3}", xs.len(), fit.slope, fit.intercept, fit.r_squared, d);
    let opt = run.record_at_optimum();
    println!("optimal epoch {} j={:.4} test={:.4} acc={:.4}", opt.epoch, opt.j, opt.test_loss, opt.test_accuracy);
}
