use ckdcnn::imgdata::generate_synthetic_dataset;
use ckdcnn::nn::model::batch_item;
use ckdcnn::nn::{build_paper_model, fit, maxpool2x2_backward, TrainConfig};
use ckdcnn::tensor::Tensor;

fn stats(name: &str, d: &[f32]) {
    let mn = d.iter().cloned().fold(f32::MAX, f32::min);
    let mx = d.iter().cloned().fold(f32::MIN, f32::max);
    let mean = d.iter().sum::<f32>() / d.len() as f32;
    let frac_pos = d.iter().filter(|&&v| v > 0.0).count() as f32 / d.len() as f32;
    println!("{name}: min {mn:.4} max {mx:.4} mean {mean:.4} frac>0 {frac_pos:.3}");
}

fn main() {
    let data = generate_synthetic_dataset([40, 40, 40, 40], 77).unwrap();
    let mut model = build_paper_model(77);
    for (do_train, tag) in [(false, "untrained"), (true, "trained")] {
        if do_train {
            let cfg = TrainConfig { epochs: 6, ..Default::default() };
            fit(&mut model, &data, &data, &cfg).unwrap();
        }
        println!("=== {tag} ===");
        let probe = generate_synthetic_dataset([1, 0, 0, 0], 123).unwrap();
        let image = batch_item(&probe.images, 0);
        let trace = model.forward_trace(&image).unwrap();
        stats("conv3_act", trace.conv3_act.data());

        let class_id = 0usize;
        let fan_out = model.dense.fan_out();
        let fan_in = model.dense.fan_in();
        let wdata = model.dense.weights.data();
        let grad_flat: Vec<f32> = (0..fan_in).map(|i| wdata[i * fan_out + class_id]).collect();
        let grad_pool3 = Tensor::from_vec(trace.pool3.shape(), grad_flat).unwrap();
        let grad_act = maxpool2x2_backward(&grad_pool3, &trace.pool3_pos).unwrap();
        stats("grad_act", grad_act.data());

        let c = 128;
        let mut alpha = vec![0f32; c];
        for px in grad_act.data().chunks(c) {
            for (a, &g) in alpha.iter_mut().zip(px) { *a += g; }
        }
        for a in alpha.iter_mut() { *a /= 49.0; }
        stats("alpha", &alpha);

        let mut raw = vec![0f32; 49];
        for (cell, px) in raw.iter_mut().zip(trace.conv3_act.data().chunks(c)) {
            *cell = px.iter().zip(&alpha).map(|(&a, &w)| w * a).sum::<f32>();
        }
        stats("raw(pre-relu)", &raw);
        println!("raw map 7x7:");
        for y in 0..7 {
            let row: Vec<String> = (0..7).map(|x| format!("{:+.3}", raw[y*7+x])).collect();
            println!("  {}", row.join(" "));
        }
    }
}
