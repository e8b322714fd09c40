use mcdimpute::models::VaeModel;
use mcdimpute::nn::{Activation, DenseLayer, Gradients, Mlp, Trainable};
use mcdimpute::{Matrix, RngStream};

const H: f64 = 1e-5;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-8)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.uniform_range(-1.0, 1.0))
            .collect(),
    )
    .unwrap()
}

/// Perturbs parameter `k` of the flattened `(w, b)` sequence of `layer` by `delta`.
fn nudge(layer: &mut DenseLayer<f64>, k: usize, delta: f64) {
    let nw = layer.w.as_slice().len();
    if k < nw {
        layer.w.as_mut_slice()[k] += delta;
    } else {
        layer.b[k - nw] += delta;
    }
}

fn analytic(grads: &Gradients<f64>, layer: usize, k: usize) -> f64 {
    let g = &grads.layers[layer];
    let nw = g.dw.as_slice().len();
    if k < nw {
        g.dw.as_slice()[k]
    } else {
        g.db[k - nw]
    }
}

fn random_mlp(rng: &mut RngStream) -> Mlp {
    let depth = 1 + (rng.next_u64() % 3) as usize;
    let widths: Vec<usize> = (0..=depth)
        .map(|_| 1 + (rng.next_u64() % 5) as usize)
        .collect();
    let acts = [Activation::Relu, Activation::Sigmoid, Activation::Linear];
    let specs: Vec<(Activation, f64)> = (0..depth)
        .map(|_| (acts[(rng.next_u64() % 3) as usize], 0.3))
        .collect();
    let mut net = Mlp::glorot(&widths, &specs, rng).unwrap();
    // Random biases keep ReLU pre-activations off the kink at exactly zero.
    for layer in &mut net.layers {
        for b in &mut layer.b {
            *b = rng.uniform_range(-0.5, 0.5);
        }
    }
    net
}

#[test]
fn mlp_gradients_match_central_differences() {
    let mut rng = RngStream::new(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let net = random_mlp(&mut rng);
        let batch = 1 + (rng.next_u64() % 4) as usize;
        let x = random_matrix(batch, net.in_dim(), &mut rng);
        let t = random_matrix(batch, net.out_dim(), &mut rng);
        let masks = net.sample_masks(batch, |_| true, &mut rng);
        let (_, grads) = net.loss_and_grads(&x, &t, masks.clone()).unwrap();
        for li in 0..net.layers.len() {
            for k in 0..net.layers[li].param_count() {
                let mut plus = net.clone();
                nudge(&mut plus.layers[li], k, H);
                let mut minus = net.clone();
                nudge(&mut minus.layers[li], k, -H);
                let lp = plus.loss_and_grads(&x, &t, masks.clone()).unwrap().0;
                let lm = minus.loss_and_grads(&x, &t, masks.clone()).unwrap().0;
                let numeric = (lp - lm) / (2.0 * H);
                worst = worst.max(rel_err(analytic(&grads, li, k), numeric));
            }
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn vae_gradients_match_central_differences() {
    let mut rng = RngStream::new(5);
    let mut worst = 0.0f64;
    for case in 0..10 {
        let (d, hidden, latent) = (3 + case % 3, 4, 2 + case % 2);
        let mut vae: VaeModel = VaeModel::with_widths(
            d,
            hidden,
            latent,
            0.25,
            0.5 + case as f64 * 0.3,
            case as u64,
        )
        .unwrap();
        for layer in vae.layers_mut() {
            for b in &mut layer.b {
                *b = rng.uniform_range(-0.5, 0.5);
            }
        }
        let batch = 3;
        let x = random_matrix(batch, d, &mut rng).map(|v| v.abs());
        let eps = Matrix::from_vec(
            batch,
            latent,
            (0..batch * latent).map(|_| rng.standard_normal()).collect(),
        )
        .unwrap();
        let tm = vae.trunk.sample_masks(batch, |_| true, &mut rng);
        let dm = vae.decoder.sample_masks(batch, |_| true, &mut rng);
        let loss = |m: &VaeModel| {
            m.loss_and_grads_with(&x, &x, &eps, tm.clone(), dm.clone())
                .unwrap()
        };
        let grads = loss(&vae).3;
        for li in 0..vae.layers().len() {
            let n = vae.layers()[li].param_count();
            for k in 0..n {
                let mut plus = vae.clone();
                nudge(plus.layers_mut()[li], k, H);
                let mut minus = vae.clone();
                nudge(minus.layers_mut()[li], k, -H);
                let numeric = (loss(&plus).0 - loss(&minus).0) / (2.0 * H);
                worst = worst.max(rel_err(analytic(&grads, li, k), numeric));
            }
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn reparameterize_passes_gradient_to_mu() {
    use mcdimpute::models::reparameterize;
    let mu = [0.3, -1.2];
    let lv = [0.4, -0.7];
    let eps = [1.1, -0.4];
    for i in 0..2 {
        let mut up = mu;
        up[i] += H;
        let mut down = mu;
        down[i] -= H;
        let zu = reparameterize(&up, &lv, &eps).unwrap();
        let zd = reparameterize(&down, &lv, &eps).unwrap();
        for j in 0..2 {
            let deriv = (zu[j] - zd[j]) / (2.0 * H);
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((deriv - expected).abs() < 1e-9);
        }
    }
}
