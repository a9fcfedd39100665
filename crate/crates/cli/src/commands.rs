//! Subcommand implementations.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use ged_core::cam_code::{decode_stream, encode_record, encode_stream, BitWriter, CodecConfig};
use ged_core::camera_est::{estimate_direction, flow_finetune, flow_to_pairs, FinetuneConfig};
use ged_core::geometry::erp_to_angles;
use ged_core::io::{
    pixel_pairs_to_bearings, read_flo, read_pairs, read_q_csv, read_rd_csv, read_sequence, read_yuv_frame, synth_dolly,
    write_flo, write_q_csv, write_sequence, SceneShape, SynthSpec,
};
use ged_core::metrics::{bd_rate, capped, ws_psnr, ws_psnr_yuv, BdReport, RdResult};
use ged_core::mocomp::{compare_models, predict_block, predict_frame, BlockSpec};
use ged_core::motion_model::op_count;
use ged_core::{MotionVector2D, UnitVector3};

use crate::args::FrameArgs;
use crate::{CamcodeOp, CamestArgs, Command, CompareArgs, MetricsOp, SceneArg, SynthArgs, WarpArgs};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Warp(a) => warp(a),
        Command::Compare(a) => compare(a),
        Command::Camest(a) => camest(a),
        Command::Camcode { op } => camcode(op),
        Command::Metrics { op } => metrics(op),
    }
}

/// Writes `text` to `path`, or to stdout without one.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let shape = match a.scene {
        SceneArg::Sphere => SceneShape::Sphere { radius: a.size },
        SceneArg::Cylinder => SceneShape::Cylinder {
            radius: a.size,
            half_length: a.length,
        },
        SceneArg::Box => SceneShape::Box {
            half_extents: [a.size, a.size, a.length],
        },
    };
    let spec = SynthSpec {
        width: a.width,
        height: a.height,
        frames: a.frames,
        bit_depth: a.bit_depth,
        chroma: !a.mono,
        q: a.q,
        step: a.step,
        drift: a.drift.to_radians(),
        shape,
        seed: a.seed,
        texture_scale: a.texture_scale,
        ..SynthSpec::default()
    };
    let seq = synth_dolly(&spec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let chroma = FrameArgs {
        width: a.width,
        height: a.height,
        bit_depth: a.bit_depth,
        mono: a.mono,
    }
    .chroma();
    write_sequence(a.out.join(format!("{}.yuv", a.name)), &seq.frames, chroma)?;
    let q: Vec<(u32, UnitVector3)> = seq.q.iter().enumerate().map(|(i, q)| (i as u32, *q)).collect();
    write_q_csv(a.out.join(format!("{}_q.csv", a.name)), &q)?;
    for (i, f) in seq.flows.iter().enumerate() {
        write_flo(a.out.join(format!("{}_flow_{i:03}.flo", a.name)), f)?;
    }
    println!(
        "wrote {} frames, {} flow fields to {}",
        seq.frames.len(),
        seq.flows.len(),
        a.out.display()
    );
    Ok(())
}

fn warp(a: WarpArgs) -> Result<()> {
    let ref_spec = a.frame.open(&a.reference)?;
    let cur_spec = a.frame.open(&a.input)?;
    let reference = read_yuv_frame(&ref_spec, a.ref_frame)?;
    let current = read_yuv_frame(&cur_spec, a.frame_index)?;
    let delta = a.model.delta.unwrap_or_else(|| a.frame.default_delta());
    let predictor = a.model.variant.predictor(a.model.scaling, delta)?;
    let t = MotionVector2D::new(a.t[0], a.t[1]);
    let (bw, bh) = a.block;

    let mut stats = String::from("x0,y0,width,height,sad\n");
    let mut total = 0u64;
    for block in BlockSpec::tile(a.frame.width, a.frame.height, bw, bh) {
        let r = predict_block(&reference, &current, block, &a.q, t, &predictor)?;
        total += r.sad;
        let _ = writeln!(
            stats,
            "{},{},{},{},{}",
            block.x0, block.y0, block.width, block.height, r.sad
        );
    }
    let _ = writeln!(stats, "total,,,,{total}");
    if let Some(out) = &a.out {
        let pred = predict_frame(&reference, bw, bh, &a.q, t, &predictor)?;
        write_sequence(out, &[pred], a.frame.chroma())?;
    }
    match &a.stats {
        Some(p) => emit(Some(p), &stats)?,
        None => println!("model={} total_sad={total}", predictor.label()),
    }
    Ok(())
}

/// Blocks whose center lies more than 30 degrees from the equator.
fn off_equator(block: &BlockSpec, width: usize, height: usize) -> bool {
    let (cx, cy) = block.center();
    let (theta, _) = erp_to_angles(cx, cy, width, height);
    (theta - FRAC_PI_2).abs() > FRAC_PI_2 / 3.0
}

fn compare(a: CompareArgs) -> Result<()> {
    let spec = a.frame.open(&a.input)?;
    let mut frames = read_sequence(&spec)?;
    if let Some(n) = a.frames {
        frames.truncate(n);
    }
    ensure!(frames.len() >= 2, "cli: compare needs at least two frames");
    ensure!(!a.models.is_empty(), "cli: no models given");
    let headings = match &a.q_csv {
        Some(p) => Some(read_q_csv(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let q_for = |pair: usize| -> Result<UnitVector3> {
        match &headings {
            None => Ok(a.q),
            Some(rows) => rows
                .iter()
                .find(|(i, _)| *i as usize == pair)
                .map(|(_, q)| *q)
                .with_context(|| format!("no heading for frame pair {pair} in q CSV")),
        }
    };
    let delta = a.delta.unwrap_or_else(|| a.frame.default_delta());
    let predictors = a
        .models
        .iter()
        .map(|m| m.predictor(crate::args::ScalingArg::Global, delta))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<&str> = predictors.iter().map(|p| p.label()).collect();
    let (w, h) = (a.frame.width, a.frame.height);
    let blocks = BlockSpec::tile(w, h, a.block.0, a.block.1);

    let mut csv = String::from("frame,x0,y0,width,height,theta_c");
    for l in &labels {
        let _ = write!(csv, ",sad_{l}");
    }
    csv.push_str(",winner\n");
    let mut aggregate = vec![0u64; predictors.len()];
    let mut wins = vec![0usize; predictors.len()];
    let mut off_wins = vec![0usize; predictors.len()];
    for n in 1..frames.len() {
        let q = q_for(n - 1)?;
        let results = compare_models(&frames[n - 1], &frames[n], &blocks, &q, &predictors, a.range, a.step)?;
        for c in &results {
            let b = c.block;
            let (cx, cy) = b.center();
            let (theta, _) = erp_to_angles(cx, cy, w, h);
            let _ = write!(csv, "{n},{},{},{},{},{theta:.6}", b.x0, b.y0, b.width, b.height);
            for (i, o) in c.outcomes.iter().enumerate() {
                aggregate[i] += o.sad;
                let _ = write!(csv, ",{}", o.sad);
            }
            let win = c.winner();
            wins[win] += 1;
            if off_equator(&b, w, h) {
                off_wins[win] += 1;
            }
            let _ = writeln!(csv, ",{}", labels[win]);
        }
    }
    if let Some(out) = &a.out {
        emit(Some(out), &csv)?;
    }
    println!("model,aggregate_sad,wins,off_equator_wins");
    for i in 0..predictors.len() {
        println!("{},{},{},{}", labels[i], aggregate[i], wins[i], off_wins[i]);
    }
    Ok(())
}

fn camest(a: CamestArgs) -> Result<()> {
    ensure!(a.stride > 0, "cli: stride must be positive");
    ensure!(
        !a.flow.is_empty() || !a.pairs.is_empty(),
        "cli: give --flow or --pairs files"
    );
    let finetune = a.finetune && !a.no_finetune;
    let cfg = FinetuneConfig {
        grid_radius: a.grid_radius_deg.to_radians(),
        levels: a.levels,
        ..FinetuneConfig::default()
    };
    // (eight-point estimate, final estimate)
    let mut estimates: Vec<(UnitVector3, UnitVector3)> = Vec::new();
    for path in &a.flow {
        let flow = read_flo(path).with_context(|| format!("reading {}", path.display()))?;
        let pairs = flow_to_pairs(&flow, a.stride)?;
        let q8 = estimate_direction(&pairs).with_context(|| format!("estimating from {}", path.display()))?;
        let q = if finetune { flow_finetune(&q8, &flow, &cfg)? } else { q8 };
        estimates.push((q8, q));
    }
    if !a.pairs.is_empty() {
        ensure!(!finetune, "cli: --finetune needs dense flow (--flow)");
        let (Some(w), Some(h)) = (a.width, a.height) else {
            bail!("cli: --pairs needs --width and --height");
        };
        for path in &a.pairs {
            let pairs = read_pairs(path).with_context(|| format!("reading {}", path.display()))?;
            let bearings = pixel_pairs_to_bearings(&pairs, w, h);
            let q = estimate_direction(&bearings).with_context(|| format!("estimating from {}", path.display()))?;
            estimates.push((q, q));
        }
    }
    let truth = match &a.truth {
        Some(p) => Some(read_q_csv(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let mut out = String::from("frame_index,qx,qy,qz");
    if truth.is_some() {
        out.push_str(",err_8pa_deg,err_deg");
    }
    out.push('\n');
    for (i, (q8, q)) in estimates.iter().enumerate() {
        let _ = write!(out, "{i},{:.12},{:.12},{:.12}", q.x(), q.y(), q.z());
        if let Some(rows) = &truth {
            let t = rows
                .iter()
                .find(|(j, _)| *j as usize == i)
                .map(|(_, t)| t)
                .with_context(|| format!("no ground truth for frame {i}"))?;
            let _ = write!(
                out,
                ",{:.6},{:.6}",
                q8.angle_to(t).to_degrees(),
                q.angle_to(t).to_degrees()
            );
        }
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}

fn camcode(op: CamcodeOp) -> Result<()> {
    let cfg = CodecConfig::default();
    match op {
        CamcodeOp::Encode { q, out } => {
            let frames = read_q_csv(&q).with_context(|| format!("reading {}", q.display()))?;
            let enc = encode_stream(&frames, &cfg)?;
            fs::write(&out, &enc.bytes).with_context(|| format!("writing {}", out.display()))?;
            println!("poc,bits,bytes");
            for rec in &enc.records {
                let mut w = BitWriter::new();
                let bits = encode_record(&mut w, rec, cfg.k);
                println!("{},{bits},{}", rec.poc, bits.div_ceil(8));
            }
            let r = enc.report;
            println!(
                "frames={} payload_bits={} payload_bytes={} container_bytes={}",
                r.frames, r.payload_bits, r.payload_bytes, r.container_bytes
            );
            Ok(())
        }
        CamcodeOp::Decode { input, out } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let dec = decode_stream(&bytes, &cfg)?;
            match out {
                Some(p) => write_q_csv(&p, &dec.q)?,
                None => print!("{}", ged_core::io::format_q_csv(&dec.q)),
            }
            Ok(())
        }
    }
}

fn metrics(op: MetricsOp) -> Result<()> {
    match op {
        MetricsOp::Wspsnr {
            frame,
            reference,
            input,
            yuv,
        } => {
            let a = read_sequence(&frame.open(&reference)?)?;
            let b = read_sequence(&frame.open(&input)?)?;
            ensure!(
                a.len() == b.len(),
                "cli: sequences differ in length ({} vs {})",
                a.len(),
                b.len()
            );
            println!("frame,wspsnr_db");
            let mut sum = 0.0;
            for (i, (x, y)) in a.iter().zip(&b).enumerate() {
                let db = capped(if yuv { ws_psnr_yuv(x, y)? } else { ws_psnr(x, y)? });
                sum += db;
                println!("{i},{db:.6}");
            }
            if !a.is_empty() {
                println!("mean,{:.6}", sum / a.len() as f64);
            }
            Ok(())
        }
        MetricsOp::Bdrate { anchor, test } => {
            let anchors = read_rd_csv(&anchor).with_context(|| format!("reading {}", anchor.display()))?;
            let tests = read_rd_csv(&test).with_context(|| format!("reading {}", test.display()))?;
            println!("label,bd_rate_pct");
            for (label, curve) in &tests {
                let a = match anchors.iter().find(|(l, _)| l == label) {
                    Some((_, c)) => c,
                    None if anchors.len() == 1 => &anchors[0].1,
                    None => bail!("cli: no anchor curve labelled '{label}'"),
                };
                println!("{label},{:.6}", bd_rate(a, curve)?);
            }
            Ok(())
        }
        MetricsOp::Opcount {
            variant,
            scaling,
            block,
        } => {
            let (v, s) = variant.kernel(scaling)?;
            let c = op_count(v, s, block.0 as u64, block.1 as u64);
            println!("trig,mul,div,add,total");
            println!("{},{},{},{},{}", c.trig, c.mul, c.div, c.add, c.total());
            Ok(())
        }
        MetricsOp::Report {
            rd,
            anchor,
            camera_bits,
            markdown,
            out,
        } => {
            let mut bits = Vec::new();
            for entry in &camera_bits {
                let (m, b) = entry
                    .split_once('=')
                    .with_context(|| format!("expected model=bits, got '{entry}'"))?;
                let b: f64 = b
                    .trim()
                    .parse()
                    .with_context(|| format!("bad bit count in '{entry}'"))?;
                bits.push((m.trim().to_string(), b));
            }
            let mut results = Vec::new();
            for (label, curve) in read_rd_csv(&rd).with_context(|| format!("reading {}", rd.display()))? {
                let (seq, model) = label
                    .split_once('/')
                    .with_context(|| format!("expected label sequence/model, got '{label}'"))?;
                let camera_bits = bits.iter().find(|(m, _)| m == model).map_or(0.0, |b| b.1);
                results.push(RdResult {
                    sequence: seq.to_string(),
                    model: model.to_string(),
                    curve,
                    camera_bits,
                });
            }
            let report = BdReport::build(&anchor, &results)?;
            let text = if markdown {
                report.to_markdown()
            } else {
                report.to_csv()
            };
            emit(out.as_deref(), &text)
        }
    }
}
