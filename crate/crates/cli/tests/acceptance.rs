//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use featgraph::dsp::filterbank::max_interior_error;
use featgraph::dsp::{analysis_filterbank, frame_signal, synthesis_filterbank, Fft, FrameConfig};
use featgraph::features::mfcc::CepstralTransform;
use featgraph::features::{
    add_deltas, fbank, frame_power, levinson_durbin, pitch, power_spectrum, zero_crossing_rate, DeltaConfig,
    MelFilterbankConfig,
};
use featgraph::io::{write_cmvn, write_wav, Waveform};
use featgraph::normalization::{apply_cmvn, CmvnStats};
use featgraph::pipeline::ops::PitchParams;
use featgraph::pipeline::{parse_pipeline, Pipeline, UtteranceInput, Value};
use featgraph::text::{segment_fmm, sentence_to_ids, SegmenterDict, Vocabulary};
use featgraph::FeatureMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn noise(r: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-amp..amp)).collect()
}

fn wave(samples: Vec<f64>) -> Waveform {
    Waveform::new(samples, 16000).expect("samples in range")
}

fn stft_round_trip() -> Check {
    let started = Instant::now();
    let cfg = FrameConfig::analysis();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = wave(noise(&mut r, 16000, 1.0));
        let spec = analysis_filterbank(&w, &cfg, 512).map_err(|e| e.to_string())?;
        let back = synthesis_filterbank(&spec, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(max_interior_error(w.samples(), back.samples(), 400));
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(worst <= 1e-6, || format!("max interior error {worst:e} > 1e-6"))?;
    ensure(secs < 5.0, || format!("took {secs:.2} s, limit 5 s"))?;
    Ok(format!(
        "max interior error {worst:.1e} over 20 waveforms in {secs:.2} s"
    ))
}

fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| {
                    v * Complex64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * (k * t % n) as f64 / n as f64,
                    )
                })
                .sum()
        })
        .collect()
}

fn dct_oracle(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    (0..x.len())
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (std::f64::consts::PI / n * (i as f64 + 0.5) * k as f64).cos())
                .sum();
            s * if k == 0 {
                (1.0 / n).sqrt()
            } else {
                (2.0 / n).sqrt()
            }
        })
        .collect()
}

fn fft_dct_oracles() -> Check {
    let mut r = rng(2);
    let mut fft_worst = 0.0f64;
    for n in [4, 8, 16, 64, 512] {
        let fft = Fft::new(n).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect();
            let want = dft(&x);
            let mut got = x.clone();
            fft.forward(&mut got);
            let scale = want.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let err = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            fft_worst = fft_worst.max(err);
        }
    }
    ensure(fft_worst <= 1e-10, || format!("FFT relative error {fft_worst:e}"))?;

    let mut dct_worst = 0.0f64;
    for _ in 0..100 {
        let n = r.gen_range(2..=64);
        let x = noise(&mut r, n, 10.0);
        let transform = CepstralTransform::new(n, n, 0.0).map_err(|e| e.to_string())?;
        let mut got = Vec::new();
        transform.apply_row(&x, &mut got);
        let err = got
            .iter()
            .zip(dct_oracle(&x))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        dct_worst = dct_worst.max(err);
    }
    ensure(dct_worst <= 1e-10, || format!("DCT error {dct_worst:e}"))?;
    Ok(format!(
        "FFT rel. error {fft_worst:.1e}, DCT error {dct_worst:.1e}"
    ))
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn levinson_vs_toeplitz() -> Check {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let order = r.gen_range(1..=12);
        // biased autocorrelation of a random signal is positive definite
        let n = r.gen_range(40..200);
        let x = noise(&mut r, n, 1.0);
        let ac: Vec<f64> = (0..=order)
            .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum())
            .collect();
        let lpc = levinson_durbin(&ac, order).map_err(|e| e.to_string())?;
        let toeplitz = (0..order)
            .map(|i| (0..order).map(|j| ac[i.abs_diff(j)]).collect())
            .collect();
        let want = dense_solve(toeplitz, ac[1..].to_vec());
        let err = lpc
            .coeffs
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    ensure(worst <= 1e-8, || format!("max coefficient error {worst:e}"))?;
    Ok(format!("max coefficient error {worst:.1e} on 100 systems"))
}

fn delta_formula() -> Check {
    let mut r = rng(4);
    let cfg = DeltaConfig::default();
    let (rows, dim) = (30, 5);

    let constant = FeatureMatrix::new(
        rows,
        dim,
        (0..rows * dim).map(|i| (i % dim) as f64 * 1.7 - 2.0).collect(),
    )
    .unwrap();
    let d = add_deltas(&constant, &cfg).map_err(|e| e.to_string())?;
    ensure(
        d.iter_rows().all(|row| row[dim..].iter().all(|&v| v == 0.0)),
        || "constant input gave nonzero deltas".into(),
    )?;

    let slope = [0.5, -1.25, 3.0, 0.0, 7.5];
    let ramp = FeatureMatrix::new(
        rows,
        dim,
        (0..rows * dim)
            .map(|i| 1.0 + slope[i % dim] * (i / dim) as f64)
            .collect(),
    )
    .unwrap();
    let d = add_deltas(&ramp, &cfg).map_err(|e| e.to_string())?;
    let mut ramp_err = 0.0f64;
    // interior rows for the first-order delta are at least `window` from each edge
    for t in cfg.window..rows - cfg.window {
        for (c, s) in slope.iter().enumerate() {
            ramp_err = ramp_err.max((d.get(t, dim + c) - s).abs());
        }
    }
    ensure(ramp_err <= 1e-12, || format!("ramp delta error {ramp_err:e}"))?;

    let mut lin_err = 0.0f64;
    for _ in 0..50 {
        let n = r.gen_range(1..40);
        let x = FeatureMatrix::new(n, dim, noise(&mut r, n * dim, 5.0)).unwrap();
        let y = FeatureMatrix::new(n, dim, noise(&mut r, n * dim, 5.0)).unwrap();
        let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let mix = FeatureMatrix::new(
            n,
            dim,
            x.data()
                .iter()
                .zip(y.data())
                .map(|(p, q)| a * p + b * q)
                .collect(),
        )
        .unwrap();
        let (dx, dy, dm) = (
            add_deltas(&x, &cfg).unwrap(),
            add_deltas(&y, &cfg).unwrap(),
            add_deltas(&mix, &cfg).unwrap(),
        );
        for ((p, q), m) in dx.data().iter().zip(dy.data()).zip(dm.data()) {
            lin_err = lin_err.max((a * p + b * q - m).abs());
        }
    }
    ensure(lin_err <= 1e-9, || format!("linearity error {lin_err:e}"))?;
    Ok(format!(
        "ramp error {ramp_err:.1e}, linearity error {lin_err:.1e}"
    ))
}

fn cmvn_self_normalization() -> Check {
    let mut r = rng(5);
    let dim = 13;
    let offsets = noise(&mut r, dim, 20.0);
    let corpus: Vec<FeatureMatrix> = (0..100)
        .map(|_| {
            let n = r.gen_range(20..120);
            let data = (0..n * dim)
                .map(|i| offsets[i % dim] + r.gen_range(-1.0..1.0) * (1 + i % dim) as f64)
                .collect();
            FeatureMatrix::new(n, dim, data).unwrap()
        })
        .collect();
    let mut whole = CmvnStats::new(dim).unwrap();
    for m in &corpus {
        whole.accumulate(m).map_err(|e| e.to_string())?;
    }
    let mut check = CmvnStats::new(dim).unwrap();
    for m in &corpus {
        check
            .accumulate(&apply_cmvn(m, &whole, true).map_err(|e| e.to_string())?)
            .unwrap();
    }
    let mean_err = check.mean().unwrap().iter().map(|m| m.abs()).fold(0.0, f64::max);
    let var_err = check
        .variance()
        .unwrap()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(mean_err <= 1e-9, || format!("per-dim mean {mean_err:e}"))?;
    ensure(var_err <= 1e-6, || format!("variance off by {var_err:e}"))?;

    let (mut a, mut b) = (CmvnStats::new(dim).unwrap(), CmvnStats::new(dim).unwrap());
    for (i, m) in corpus.iter().enumerate() {
        if i < 37 { a.accumulate(m) } else { b.accumulate(m) }.unwrap();
    }
    a.merge(&b).map_err(|e| e.to_string())?;
    let rel = whole
        .sum
        .iter()
        .chain(&whole.sumsq)
        .zip(a.sum.iter().chain(&a.sumsq))
        .map(|(x, y)| (x - y).abs() / x.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    ensure(a.count == whole.count && rel <= 1e-9, || {
        format!("shard merge relative error {rel:e}")
    })?;
    Ok(format!(
        "mean {mean_err:.1e}, |var-1| {var_err:.1e}, shard merge rel. error {rel:.1e}"
    ))
}

fn pitch_tracking() -> Check {
    // the pipeline op's defaults
    let params = PitchParams::default();
    let (cfg, framing) = (params.pitch(), params.frame());
    let mut worst_lag = 0.0f64;
    for f0 in [80.0, 120.0, 220.0, 330.0] {
        let x: Vec<f64> = (0..16000)
            .map(|t| 0.5 * (2.0 * std::f64::consts::PI * f0 * t as f64 / 16000.0).sin())
            .collect();
        let frames = frame_signal(&x, 16000, &framing).unwrap();
        let out = pitch(&frames, &cfg, 16000).map_err(|e| e.to_string())?;
        for (i, row) in out.iter_rows().enumerate() {
            ensure(row[0] > 0.0, || format!("{f0} Hz frame {i} unvoiced"))?;
            // one lag step: estimated lag within 1 sample of the true period
            let lag_err = (16000.0 / row[0] - 16000.0 / f0).abs();
            ensure(lag_err <= 1.0, || {
                format!("{f0} Hz frame {i}: got {:.2} Hz", row[0])
            })?;
            worst_lag = worst_lag.max(lag_err);
        }
    }

    let mut r = rng(6);
    let frames = frame_signal(&noise(&mut r, 10 * 16000, 0.5), 16000, &framing).unwrap();
    let out = pitch(&frames, &cfg, 16000).unwrap();
    let unvoiced = out.iter_rows().filter(|row| row[0] == 0.0).count();
    let share = unvoiced as f64 / out.rows() as f64;
    ensure(share >= 0.95, || {
        format!("only {:.1}% of noise frames unvoiced", 100.0 * share)
    })?;
    Ok(format!(
        "worst lag error {worst_lag:.2} samples, noise {:.1}% unvoiced ({} ms frames)",
        100.0 * share,
        framing.frame_length_ms
    ))
}

fn zcr_and_power() -> Check {
    let mut r = rng(7);
    let frames: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let n = r.gen_range(2..600);
            let mut f = noise(&mut r, n, 1.0);
            if i % 10 == 0 {
                f.iter_mut().step_by(3).for_each(|v| *v = 0.0);
            }
            f
        })
        .collect();
    let zcr = zero_crossing_rate(&frames).map_err(|e| e.to_string())?;
    let power = frame_power(&frames);
    let mut power_err = 0.0f64;
    for (i, f) in frames.iter().enumerate() {
        let mut crossings = 0usize;
        for t in 1..f.len() {
            let (a, b) = (f[t - 1] >= 0.0, f[t] >= 0.0);
            if a != b {
                crossings += 1;
            }
        }
        let want = crossings as f64 / (f.len() - 1) as f64;
        ensure(zcr.get(i, 0) == want, || {
            format!("frame {i}: zcr {} vs {want}", zcr.get(i, 0))
        })?;
        let mut energy = 0.0;
        for v in f {
            energy += v * v;
        }
        let want = if energy > 1e-10 {
            energy.ln()
        } else {
            1e-10f64.ln()
        };
        power_err = power_err.max((power.get(i, 0) - want).abs());
    }
    ensure(power_err <= 1e-12, || format!("power error {power_err:e}"))?;
    Ok(format!("ZCR exact on 200 frames, power error {power_err:.1e}"))
}

fn batch_stream_parity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut r = rng(8);
    let mut stats = CmvnStats::new(40).unwrap();
    stats
        .accumulate(&FeatureMatrix::new(50, 40, noise(&mut r, 2000, 4.0)).unwrap())
        .unwrap();
    write_cmvn(&stats, dir.path().join("stats.json")).map_err(|e| e.to_string())?;

    let head = "version: 1\ninputs: [{name: wav, modality: audio}]\nstages:\n  - {name: fbank, op: fbank, inputs: [wav]}\n";
    let pipelines = [
        ("fbank", format!("{head}outputs: [fbank]\n")),
        ("mfcc", "version: 1\ninputs: [{name: wav, modality: audio}]\nstages:\n  - {name: m, op: mfcc, inputs: [wav]}\noutputs: [m]\n".to_string()),
        ("fbank+deltas", format!("{head}  - {{name: d, op: add_deltas, inputs: [fbank]}}\noutputs: [d]\n")),
        ("fbank+cmvn", format!("{head}  - {{name: n, op: cmvn_apply, params: {{stats: stats.json}}, inputs: [fbank]}}\noutputs: [n]\n")),
    ];
    let utterances: Vec<UtteranceInput> = (0..10)
        .map(|_| {
            let n = r.gen_range(0..6000);
            UtteranceInput::from([("wav".to_string(), Value::Audio(wave(noise(&mut r, n, 0.8))))])
        })
        .collect();
    let mut runs = 0;
    for (name, config) in &pipelines {
        let spec = parse_pipeline(config).map_err(|e| e.to_string())?;
        let p = Pipeline::compile(&spec, dir.path()).map_err(|e| e.to_string())?;
        for (u, input) in utterances.iter().enumerate() {
            let batch = p.run(input).map_err(|e| e.to_string())?;
            for chunk in [1, 7, 160, 4096] {
                let stream = p.run_stream(input, chunk).map_err(|e| e.to_string())?;
                if let Some((out, at)) = batch.first_difference(&stream) {
                    return Err(format!(
                        "{name}, utterance {u}, chunk {chunk}: output {out} differs at {at:?}"
                    ));
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} stream runs bit-identical to batch"))
}

fn random_unicode(r: &mut ChaCha8Rng, alphabet: &[char]) -> String {
    let n = r.gen_range(0..30);
    (0..n)
        .map(|_| {
            if r.gen_bool(0.7) {
                alphabet[r.gen_range(0..alphabet.len())]
            } else {
                loop {
                    if let Some(c) = char::from_u32(r.gen_range(0..0x11_0000)) {
                        break c;
                    }
                }
            }
        })
        .collect()
}

fn text_path() -> Check {
    let vocab_text = "<pad>\n<unk>\n<s>\n</s>\nhello\nworld\n";
    let vocab = Vocabulary::parse(vocab_text).map_err(|e| e.to_string())?;
    let cases: [(&[&str], [u32; 4], usize); 3] = [
        (&["hello", "world"], [4, 5, 0, 0], 2),
        (&["hello", "mars"], [4, 1, 0, 0], 2),
        (&[], [0, 0, 0, 0], 0),
    ];
    for (tokens, ids, len) in cases {
        let seq = sentence_to_ids(tokens, &vocab, 4, false).map_err(|e| e.to_string())?;
        ensure(seq.ids == ids && seq.true_length == len, || {
            format!("{tokens:?} gave {seq:?}")
        })?;
    }

    let mut r = rng(9);
    let alphabet: Vec<char> = "北京大学生活ab😀é\u{301}".chars().collect();
    let dict =
        SegmenterDict::new(["北京", "大学", "北京大学", "学生", "ab", "😀é"]).map_err(|e| e.to_string())?;
    for i in 0..1000 {
        let s = random_unicode(&mut r, &alphabet);
        let parts = segment_fmm(&s, &dict);
        ensure(parts.concat() == s && parts.iter().all(|p| !p.is_empty()), || {
            format!("string {i} {s:?} segmented to {parts:?}")
        })?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, text) in [
        vocab_text,
        "<pad>\n<unk>\n<s>\n</s>\n北京\nworld",
        "<pad>\n<unk>\n<s>\n</s>\n",
    ]
    .iter()
    .enumerate()
    {
        let src = dir.path().join(format!("v{i}.txt"));
        let dst = dir.path().join(format!("v{i}.out"));
        fs::write(&src, text).unwrap();
        Vocabulary::load(&src)
            .and_then(|v| v.save(&dst))
            .map_err(|e| e.to_string())?;
        ensure(fs::read(&src).unwrap() == fs::read(&dst).unwrap(), || {
            format!("vocab {i} changed on round trip")
        })?;
    }
    Ok("3 id examples exact, FMM lossless on 1000 strings, 3 vocab files byte-identical".into())
}

fn extract_args<'a>(
    config: &'a str,
    scp: &'a str,
    ark: &'a str,
    out_scp: &'a str,
    jobs: &'a str,
) -> [&'a str; 11] {
    [
        "extract",
        "--config",
        config,
        "--wav-scp",
        scp,
        "--out-ark",
        ark,
        "--out-scp",
        out_scp,
        "--jobs",
        jobs,
    ]
}

fn parallel_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let p = |name: &str| d.join(name).to_str().unwrap().to_string();
    fs::write(
        d.join("p.yaml"),
        "version: 1\ninputs: [{name: wav, modality: audio}]\nstages:\n  - {name: fbank, op: fbank, inputs: [wav]}\n  - {name: d, op: add_deltas, inputs: [fbank]}\noutputs: [d]\n",
    )
    .unwrap();
    let mut r = rng(10);
    let mut scp = String::new();
    for i in 0..50 {
        let n = r.gen_range(400..24000);
        let pcm: Vec<i16> = (0..n).map(|_| r.gen_range(-12000..12000)).collect();
        let path = d.join(format!("u{i:02}.wav"));
        write_wav(&path, &Waveform::from_i16(&pcm, 16000).unwrap()).map_err(|e| e.to_string())?;
        scp.push_str(&format!("utt{i:02}\t{}\n", path.display()));
    }
    fs::write(d.join("wav.scp"), scp).unwrap();

    let mut arks = Vec::new();
    for jobs in ["1", "8"] {
        let (ark, out_scp) = (p(&format!("j{jobs}.ark")), p(&format!("j{jobs}.scp")));
        let status = Command::new(env!("CARGO_BIN_EXE_featgraph"))
            .args(extract_args(&p("p.yaml"), &p("wav.scp"), &ark, &out_scp, jobs))
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!(
                "--jobs {jobs} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            )
        })?;
        let index = fs::read_to_string(&out_scp).unwrap().replace(&ark, "ARK");
        arks.push((fs::read(&ark).unwrap(), index));
    }
    ensure(arks[0] == arks[1], || {
        "archives differ between --jobs 1 and --jobs 8".into()
    })?;
    Ok(format!(
        "50 utterances, {} archive bytes identical",
        arks[0].0.len()
    ))
}

fn throughput() -> Check {
    let mut r = rng(11);
    let w = wave(noise(&mut r, 60 * 16000, 0.5));
    let started = Instant::now();
    let power = power_spectrum(&w, &FrameConfig::features()).map_err(|e| e.to_string())?;
    let feats = fbank(&power, &MelFilterbankConfig::default(), 16000, 512).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    ensure(feats.rows() == 5998, || format!("{} frames", feats.rows()))?;
    ensure(secs < 2.0, || format!("took {secs:.2} s, limit 2 s"))?;
    Ok(format!("60 s of audio -> {} frames in {secs:.3} s", feats.rows()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("STFT round trip", stft_round_trip),
        ("FFT/DCT oracles", fft_dct_oracles),
        ("Levinson-Durbin vs Toeplitz solve", levinson_vs_toeplitz),
        ("delta formula", delta_formula),
        ("CMVN self-normalization", cmvn_self_normalization),
        ("pitch", pitch_tracking),
        ("ZCR and frame power", zcr_and_power),
        ("batch/stream parity", batch_stream_parity),
        ("text path", text_path),
        ("determinism under parallelism", parallel_determinism),
        ("throughput", throughput),
    ];
    // keep panic messages from interleaving with the report
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
