use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use evfilt_core::filter::passed_stream;
use evfilt_core::hw::{hw_filter_scored, throughput_csv, throughput_report, PipelineTiming};
use evfilt_core::metrics::{pr_from_labeled, roc_from_labeled, skip_warmup};
use evfilt_core::noise::RNG_ALGORITHM;
use evfilt_core::scene::MovingBarScene;
use evfilt_core::{
    filter_stream, generate_noise, merge_streams, nnb_filter, pipeline_simulate, read_events, relabel_noise,
    stcf_filter, write_events, Algorithm, Event, EventStream, FilterConfig, Format, Geometry, HwParams, NoiseConfig,
    PipelineConfig, PipelineStats, ScoredEvent,
};
use rayon::prelude::*;

use crate::args::*;
use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

pub const DEFAULT_SCENE_DURATION_US: u64 = 2_000_000;
pub const DEFAULT_SCENE_SEED: u64 = 7;

/// Per-invocation state shared by all commands.
pub struct Ctx {
    pub settings: Settings,
    pub manifest_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgoSpec {
    Dif,
    Bif,
    DifHw,
    Nnb,
    Stcf(usize),
}

impl AlgoSpec {
    /// `stcf` without a count takes `default_n`.
    pub fn parse(s: &str, default_n: usize) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "dif" => AlgoSpec::Dif,
            "bif" => AlgoSpec::Bif,
            "dif-hw" | "dif_hw" => AlgoSpec::DifHw,
            "nnb" => AlgoSpec::Nnb,
            "stcf" => AlgoSpec::Stcf(default_n),
            other => match other.strip_prefix("stcf").map(usize::from_str) {
                Some(Ok(n)) => AlgoSpec::Stcf(n),
                _ => return Err(CliError::Config(format!("unknown algorithm {s:?}"))),
            },
        })
    }
}

impl fmt::Display for AlgoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgoSpec::Dif => f.write_str("dif"),
            AlgoSpec::Bif => f.write_str("bif"),
            AlgoSpec::DifHw => f.write_str("dif-hw"),
            AlgoSpec::Nnb => f.write_str("nnb"),
            AlgoSpec::Stcf(n) => write!(f, "stcf{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub algo: AlgoSpec,
    pub cfg: FilterConfig,
    pub hw: HwParams,
}

impl Resolved {
    fn record(&self, m: &mut RunManifest) {
        m.set("algo", self.algo.to_string());
        m.set("scale", self.cfg.scale);
        m.set("update_shift", self.cfg.update_shift);
        m.set("filter_len_us", self.cfg.filter_length_us);
        m.set("global_update_us", self.cfg.global_update_period_us);
        m.set("init_interval_us", self.cfg.init_interval_us);
        if self.algo == AlgoSpec::DifHw {
            m.set("trunc_bits", self.hw.trunc_bits);
            m.set("sat_bits", self.hw.k_sat_bits);
            m.set("dt_bits", self.hw.dt_bits);
            m.set("dist_frac_bits", self.hw.dist_frac_bits);
        }
    }
}

fn resolve(p: &FilterParams, s: &mut Settings) -> Result<Resolved> {
    let d = FilterConfig::default();
    let h = HwParams::default();
    let n = s.pick(p.n, "n", 2usize)?;
    let algo = AlgoSpec::parse(&s.pick(p.algo.clone(), "algo", "dif".to_string())?, n)?;
    let cfg = FilterConfig {
        scale: s.pick(p.scale, "scale", d.scale)?,
        update_shift: s.pick(p.update_shift, "update_shift", d.update_shift)?,
        filter_length_us: s.pick(p.filter_len_us, "filter_len_us", d.filter_length_us)?,
        global_update_period_us: s.pick(p.global_update_us, "global_update_us", d.global_update_period_us)?,
        init_interval_us: s.pick(p.init_interval_us, "init_interval_us", d.init_interval_us)?,
        init_timestamp_us: d.init_timestamp_us,
    };
    let hw = HwParams {
        trunc_bits: s.pick(p.trunc_bits, "trunc_bits", h.trunc_bits)?,
        k_sat_bits: s.pick(p.sat_bits, "sat_bits", h.k_sat_bits)?,
        dt_bits: s.pick(p.dt_bits, "dt_bits", h.dt_bits)?,
        dist_frac_bits: s.pick(p.dist_frac_bits, "dist_frac_bits", h.dist_frac_bits)?,
        ..h
    };
    cfg.validate()?;
    if algo == AlgoSpec::DifHw {
        hw.validate_model()?;
    }
    Ok(Resolved { algo, cfg, hw })
}

pub fn run_algo(stream: &EventStream, r: &Resolved) -> Result<Vec<ScoredEvent>> {
    let window = r.cfg.filter_length_us;
    Ok(match r.algo {
        AlgoSpec::Dif => filter_stream(stream, &r.cfg, Algorithm::Dif)?,
        AlgoSpec::Bif => filter_stream(stream, &r.cfg, Algorithm::Bif)?,
        AlgoSpec::DifHw => hw_filter_scored(stream, &r.cfg, &r.hw)?,
        AlgoSpec::Nnb => nnb_filter(stream, window)?,
        AlgoSpec::Stcf(n) => stcf_filter(stream, n, window)?,
    })
}

fn geometry(g: &GeometryArgs, s: &mut Settings) -> Result<Option<Geometry>> {
    let w = s.pick_opt(g.width, "width")?;
    let h = s.pick_opt(g.height, "height")?;
    match (w, h) {
        (Some(w), Some(h)) => Ok(Some(Geometry::new(w, h))),
        (None, None) => Ok(None),
        _ => Err(CliError::Config("--width and --height go together".into())),
    }
}

fn read(path: &Path, g: Option<Geometry>, m: &mut RunManifest) -> Result<EventStream> {
    let stream = read_events(path, Format::from_path(path), g)?;
    m.input(path)?;
    Ok(stream)
}

fn write(stream: &EventStream, path: &Path, m: &mut RunManifest) -> Result<()> {
    write_events(stream, path, Format::from_path(path))?;
    m.output(path)?;
    Ok(())
}

fn finish(ctx: Ctx, mut m: RunManifest, start: Instant, primary: Option<&Path>) -> Result<()> {
    ctx.settings.finish()?;
    m.wall_clock_s = start.elapsed().as_secs_f64();
    m.emit(ctx.manifest_path.as_deref(), primary)?;
    Ok(())
}

fn default_duration(stream: &EventStream) -> u64 {
    stream.end_time().map_or(1, |t| t + 1)
}

pub fn synth(a: &SynthArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("synth");
    let s = &mut ctx.settings;
    let duration = s.pick(a.duration_us, "duration_us", DEFAULT_SCENE_DURATION_US)?;
    let seed = s.pick(a.seed, "seed", DEFAULT_SCENE_SEED)?;
    let rate = s.pick_opt(a.noise_rate, "noise_rate")?;
    let noise_seed = s.pick(a.noise_seed, "noise_seed", 1)?;
    let scene = MovingBarScene::standard(duration, seed);
    let mut stream = scene.generate();
    m.set("duration_us", duration);
    m.seeds.push(seed);
    m.rng = Some(RNG_ALGORITHM);
    if let Some(rate) = rate {
        let noise = generate_noise(&NoiseConfig::new(scene.geometry, rate, duration, noise_seed))?;
        stream = merge_streams(&stream, &noise)?;
        m.set("noise_rate", rate);
        m.seeds.push(noise_seed);
    }
    write(&stream, &a.out, &mut m)?;
    m.events = Some(stream.len() as u64);
    println!("wrote {} events ({} signal, {} noise)", stream.len(), stream.signal_count(), stream.noise_count());
    finish(ctx, m, start, Some(&a.out))
}

pub fn add_noise(a: &AddNoiseArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("add-noise");
    let s = &mut ctx.settings;
    let g = geometry(&a.geometry, s)?;
    let rate = s.pick_opt(a.rate, "rate")?.ok_or_else(|| CliError::Config("--rate is required".into()))?;
    let seed = s.pick(a.seed, "seed", 1)?;
    let step = s.pick(a.time_step_us, "time_step_us", evfilt_core::noise::DEFAULT_TIME_STEP_US)?;
    let duration_flag = s.pick_opt(a.duration_us, "duration_us")?;
    let clean = read(&a.input, g, &mut m)?;
    let duration = duration_flag.unwrap_or_else(|| default_duration(&clean));
    let cfg = NoiseConfig::new(clean.geometry(), rate, duration, seed).with_time_step(step);
    let noise = generate_noise(&cfg)?;
    let mixed = merge_streams(&clean, &noise)?;
    write(&mixed, &a.out, &mut m)?;
    m.set("rate", rate);
    m.set("duration_us", duration);
    m.set("time_step_us", step);
    m.seeds.push(seed);
    m.rng = Some(RNG_ALGORITHM);
    m.events = Some(mixed.len() as u64);
    println!("added {} noise events to {} events", noise.len(), clean.len());
    finish(ctx, m, start, Some(&a.out))
}

pub fn mix(a: &MixArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("mix");
    let g = geometry(&a.geometry, &mut ctx.settings)?;
    let clean = read(&a.clean, g, &mut m)?;
    let mut noise = read(&a.noise, g, &mut m)?;
    if a.relabel {
        noise = relabel_noise(&noise)?;
    }
    let mixed = merge_streams(&clean, &noise)?;
    write(&mixed, &a.out, &mut m)?;
    m.set("relabel", a.relabel);
    m.events = Some(mixed.len() as u64);
    println!("merged {} + {} events", clean.len(), noise.len());
    finish(ctx, m, start, Some(&a.out))
}

pub fn write_scores(scored: &[ScoredEvent], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,y,p,score,decision")?;
    for s in scored {
        let e = s.event;
        writeln!(w, "{},{},{},{},{},{}", e.t, e.x, e.y, e.p, s.score, s.pass as u8)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoredEvent>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let bad = |n: usize, why: &str| CliError::Input(format!("{}:{}: {why}", path.display(), n));
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some("t,x,y,p,score,decision") {
        return Err(bad(1, "expected header t,x,y,p,score,decision"));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(bad(i + 2, "expected 6 fields"));
        }
        let num = |k: usize| f[k].parse::<u64>().map_err(|_| bad(i + 2, "bad integer"));
        let (t, x, y, p) = (num(0)?, num(1)?, num(2)?, num(3)?);
        if x > u16::MAX as u64 || y > u16::MAX as u64 || p > 3 {
            return Err(bad(i + 2, "field out of range"));
        }
        let score: f64 = f[4].parse().map_err(|_| bad(i + 2, "bad score"))?;
        let pass = match f[5] {
            "1" => true,
            "0" => false,
            _ => return Err(bad(i + 2, "decision must be 0 or 1")),
        };
        out.push(ScoredEvent {
            event: Event::new(t, x as u16, y as u16, p as u8),
            score,
            pass,
        });
    }
    Ok(out)
}

pub fn filter(a: &FilterArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("filter");
    let g = geometry(&a.geometry, &mut ctx.settings)?;
    let r = resolve(&a.params, &mut ctx.settings)?;
    r.record(&mut m);
    let stream = read(&a.input, g, &mut m)?;
    let t0 = Instant::now();
    let scored = run_algo(&stream, &r)?;
    let secs = t0.elapsed().as_secs_f64();
    if scored.len() != stream.len() {
        return Err(CliError::Internal("filter dropped events from its output".into()));
    }
    let passed = passed_stream(&stream, &scored);
    if let Some(out) = &a.out {
        write(&passed, out, &mut m)?;
    }
    if let Some(path) = &a.emit_scores {
        write_scores(&scored, path)?;
        m.output(path)?;
    }
    let signal_pass = passed.signal_count();
    println!(
        "{}: {} of {} events passed (signal {}/{}, noise {}/{})",
        r.algo,
        passed.len(),
        stream.len(),
        signal_pass,
        stream.signal_count(),
        passed.noise_count(),
        stream.noise_count()
    );
    m.events = Some(stream.len() as u64);
    m.meps = Some(meps(stream.len(), secs));
    let primary = a.out.as_deref().or(a.emit_scores.as_deref());
    finish(ctx, m, start, primary)
}

fn meps(events: usize, secs: f64) -> f64 {
    if secs > 0.0 {
        events as f64 / secs / 1e6
    } else {
        0.0
    }
}

fn write_points(path: &Path, header: &str, points: &[(f64, f64)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for (a, b) in points {
        writeln!(w, "{a},{b}")?;
    }
    w.flush()?;
    Ok(())
}

fn labeled(scored: &[ScoredEvent]) -> Vec<(f64, bool)> {
    scored.iter().map(|s| (s.score, s.is_signal())).collect()
}

pub fn eval(a: &EvalArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("eval");
    let skip = ctx.settings.pick(a.skip_us, "skip_us", 0)?;
    let scored = skip_warmup(&read_scores(&a.scores)?, skip);
    m.input(&a.scores)?;
    let pairs = labeled(&scored);
    let roc = roc_from_labeled(&pairs)?;
    let pr = pr_from_labeled(&pairs)?;
    write_points(&a.out, "fpr,tpr", &roc.points)?;
    m.output(&a.out)?;
    if let Some(path) = &a.pr_out {
        write_points(path, "recall,precision", &pr.points)?;
        m.output(path)?;
    }
    m.set("skip_us", skip);
    m.extra.insert("auroc".into(), roc.auroc.into());
    m.extra.insert("auprc".into(), pr.auprc.into());
    m.events = Some(scored.len() as u64);
    println!("auroc {:.6}\nauprc {:.6}", roc.auroc, pr.auprc);
    finish(ctx, m, start, Some(&a.out))
}

const SWEEP_HEADER: &str = "algo,scale,update_shift,rate_hz,seed,signal,noise,auroc,auprc";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CellKey {
    algo: String,
    scale: u32,
    shift: u32,
    rate: String,
    seed: u64,
}

impl CellKey {
    fn parse(line: &str) -> Option<CellKey> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return None;
        }
        Some(CellKey {
            algo: f[0].to_string(),
            scale: f[1].parse().ok()?,
            shift: f[2].parse().ok()?,
            rate: f[3].parse::<f64>().ok()?.to_string(),
            seed: f[4].parse().ok()?,
        })
    }
}

/// Rows already in a summary file, in file order.
fn existing_rows(path: &Path) -> Result<Vec<(CellKey, String)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(h) if h == SWEEP_HEADER => {}
        Some(_) => return Err(CliError::Input(format!("{}: not a sweep summary", path.display()))),
    }
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let key = CellKey::parse(line).ok_or_else(|| CliError::Input(format!("{}: bad row {line:?}", path.display())))?;
        if seen.insert(key.clone()) {
            rows.push((key, line.to_string()));
        }
    }
    Ok(rows)
}

pub fn sweep(a: &SweepArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("sweep");
    let s = &mut ctx.settings;
    let list = |v: Option<Vec<String>>, s: &mut Settings, key: &str, default: &str| -> Result<Vec<String>> {
        let joined = s.pick(v.map(|v| v.join(",")), key, default.to_string())?;
        Ok(joined.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())
    };
    let strs = |v: &Option<Vec<u32>>| v.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect());
    let algo_names = list(a.algos.clone(), s, "algos", "dif")?;
    let scales = list(strs(&a.scales), s, "scales", "16")?;
    let shifts = list(strs(&a.shifts), s, "shifts", "2")?;
    let rates = list(a.rates.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect()), s, "rates", "0.25,1,5")?;
    let seeds = list(a.seeds.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect()), s, "seeds", "1")?;
    let filter_len = s.pick(a.filter_len_us, "filter_len_us", FilterConfig::default().filter_length_us)?;
    let period = s.pick(a.global_update_us, "global_update_us", FilterConfig::default().global_update_period_us)?;
    let skip = s.pick(a.skip_us, "skip_us", 0)?;
    let duration = s.pick(a.duration_us, "duration_us", DEFAULT_SCENE_DURATION_US)?;
    let scene_seed = s.pick(a.scene_seed, "scene_seed", DEFAULT_SCENE_SEED)?;
    let jobs = s.pick_opt(a.jobs, "jobs")?;
    let g = geometry(&a.geometry, s)?;

    let parse_all = |v: &[String], what: &str| -> Result<Vec<f64>> {
        v.iter()
            .map(|x| x.parse::<f64>().map_err(|_| CliError::Config(format!("bad {what} {x:?}"))))
            .collect()
    };
    let algos: Vec<AlgoSpec> = algo_names.iter().map(|n| AlgoSpec::parse(n, 2)).collect::<Result<_>>()?;
    let scales: Vec<u32> = parse_all(&scales, "scale")?.into_iter().map(|v| v as u32).collect();
    let shifts: Vec<u32> = parse_all(&shifts, "shift")?.into_iter().map(|v| v as u32).collect();
    let rates = parse_all(&rates, "rate")?;
    let seeds: Vec<u64> = parse_all(&seeds, "seed")?.into_iter().map(|v| v as u64).collect();

    let clean = match &a.input {
        Some(path) => read(path, g, &mut m)?,
        None => MovingBarScene::standard(duration, scene_seed).generate(),
    };
    let noise_duration = match &a.input {
        Some(_) => default_duration(&clean),
        None => duration,
    };

    let mut grid = Vec::new();
    for &algo in &algos {
        for &scale in &scales {
            for &shift in &shifts {
                let cfg = FilterConfig {
                    scale,
                    update_shift: shift,
                    filter_length_us: filter_len,
                    global_update_period_us: period,
                    ..FilterConfig::default()
                };
                cfg.validate()?;
                for &rate in &rates {
                    NoiseConfig::new(clean.geometry(), rate, noise_duration, 0).validate()?;
                    for &seed in &seeds {
                        let key = CellKey { algo: algo.to_string(), scale, shift, rate: rate.to_string(), seed };
                        grid.push((key, Resolved { algo, cfg, hw: HwParams::default() }, rate));
                    }
                }
            }
        }
    }

    let previous = existing_rows(&a.out)?;
    let done: BTreeMap<CellKey, String> = previous.iter().cloned().collect();
    let todo: Vec<_> = grid.iter().filter(|(k, _, _)| !done.contains_key(k)).collect();

    // completed rows are appended as they finish, so an interrupted sweep resumes
    let fresh = !a.out.exists() || std::fs::metadata(&a.out)?.len() == 0;
    let mut file = OpenOptions::new().create(true).append(true).open(&a.out)?;
    if fresh {
        writeln!(file, "{SWEEP_HEADER}")?;
    }
    let sink = Mutex::new(file);
    let run_cell = |(key, r, rate): &&(CellKey, Resolved, f64)| -> Result<(CellKey, String)> {
        let noise = generate_noise(&NoiseConfig::new(clean.geometry(), *rate, noise_duration, key.seed))?;
        let stream = merge_streams(&clean, &noise)?;
        let scored = skip_warmup(&run_algo(&stream, r)?, skip);
        let pairs = labeled(&scored);
        let roc = roc_from_labeled(&pairs)?;
        let pr = pr_from_labeled(&pairs)?;
        let signal = pairs.iter().filter(|p| p.1).count();
        let row = format!(
            "{},{},{},{},{},{},{},{:.6},{:.6}",
            key.algo,
            key.scale,
            key.shift,
            key.rate,
            key.seed,
            signal,
            pairs.len() - signal,
            roc.auroc,
            pr.auprc
        );
        let mut f = sink.lock().expect("sweep output lock");
        writeln!(f, "{row}")?;
        f.flush()?;
        Ok(((*key).clone(), row))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let computed: Vec<(CellKey, String)> = pool.install(|| todo.par_iter().map(run_cell).collect::<Result<_>>())?;
    drop(sink);

    // canonical order: grid cells first, then rows from earlier grids
    let mut rows: BTreeMap<CellKey, String> = done;
    rows.extend(computed.iter().cloned());
    let in_grid: HashSet<&CellKey> = grid.iter().map(|(k, _, _)| k).collect();
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for (key, _, _) in &grid {
        text.push_str(&rows[key]);
        text.push('\n');
    }
    for (key, row) in &previous {
        if !in_grid.contains(key) {
            text.push_str(row);
            text.push('\n');
        }
    }
    let tmp = a.out.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, &a.out)?;
    m.output(&a.out)?;

    m.set("algos", algos.iter().map(|a| a.to_string()).collect::<Vec<_>>());
    m.set("scales", &scales);
    m.set("shifts", &shifts);
    m.set("rates", &rates);
    m.set("filter_len_us", filter_len);
    m.set("global_update_us", period);
    m.set("skip_us", skip);
    if a.input.is_none() {
        m.set("scene", "moving-bars");
        m.set("duration_us", duration);
        m.set("scene_seed", scene_seed);
    }
    m.seeds = seeds.clone();
    m.rng = Some(RNG_ALGORITHM);
    m.extra.insert("cells".into(), grid.len().into());
    m.extra.insert("computed".into(), computed.len().into());
    m.extra.insert("skipped".into(), (grid.len() - computed.len()).into());
    println!("{} cells: {} computed, {} already present", grid.len(), computed.len(), grid.len() - computed.len());
    finish(ctx, m, start, Some(&a.out))
}

pub fn pipeline(a: &PipelineArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("pipeline");
    let s = &mut ctx.settings;
    let clock_mhz = s.pick(a.clock_mhz, "clock_mhz", 312.70)?;
    let width = s.pick_opt(a.width, "width")?;
    let height = s.pick_opt(a.height, "height")?;
    let scale = s.pick(a.scale, "scale", 16)?;
    let period = s.pick(a.global_update_us, "global_update_us", FilterConfig::default().global_update_period_us)?;
    let overhead = s.pick(a.overhead_cycles, "overhead_cycles", evfilt_core::hw::DEFAULT_OVERHEAD_CYCLES)?;
    if !(clock_mhz > 0.0 && clock_mhz.is_finite()) {
        return Err(CliError::Config("clock must be positive".into()));
    }
    let cfg = FilterConfig { scale, global_update_period_us: period, ..FilterConfig::default() };
    cfg.validate()?;
    let clock = clock_mhz * 1e6;
    let stats: PipelineStats = match &a.input {
        Some(path) => {
            let g = match (width, height) {
                (Some(w), Some(h)) => Some(Geometry::new(w, h)),
                _ => None,
            };
            let stream = read(path, g, &mut m)?;
            let pipe = PipelineConfig { clock_hz: clock, overhead_cycles: overhead, forwarding: !a.no_forwarding };
            let (decisions, stats) = pipeline_simulate(&stream, &cfg, &HwParams::default(), &pipe)?;
            if let Some(out) = &a.decisions {
                let mut w = BufWriter::new(File::create(out)?);
                for d in &decisions {
                    writeln!(w, "{}", *d as u8)?;
                }
                w.flush()?;
                m.output(out)?;
            }
            m.events = Some(stats.events_processed);
            stats
        }
        None => {
            let timing = PipelineTiming {
                overhead_cycles: overhead,
                ..PipelineTiming::for_sensor(clock, width.unwrap_or(1280) as u32, height.unwrap_or(720) as u32, scale, period)
            };
            PipelineStats::from_timing(&timing)
        }
    };
    print!("{}", throughput_report(&stats));
    if let Some(path) = &a.csv {
        std::fs::write(path, throughput_csv(&stats))?;
        m.output(path)?;
    }
    m.set("clock_mhz", clock_mhz);
    m.set("scale", scale);
    m.set("global_update_us", period);
    m.set("overhead_cycles", overhead);
    m.set("forwarding", !a.no_forwarding);
    m.meps = Some(stats.effective_meps);
    let primary = a.csv.as_deref().or(a.decisions.as_deref());
    finish(ctx, m, start, primary)
}

/// Uniform noise over a DAVIS346-sized sensor, cut to exactly `n` events.
fn synthetic_bench_stream(n: usize, seed: u64) -> Result<EventStream> {
    let g = Geometry::new(346, 260);
    let mut rate = (n as f64 / g.pixels() as f64 * 1.05).max(0.01);
    loop {
        let mut events = generate_noise(&NoiseConfig::new(g, rate, 1_000_000, seed))?.into_events();
        if events.len() >= n {
            events.truncate(n);
            return Ok(EventStream::new(g, events)?);
        }
        rate *= 1.5;
    }
}

pub fn bench(a: &BenchArgs, mut ctx: Ctx) -> Result<()> {
    let start = Instant::now();
    let mut m = RunManifest::new("bench");
    let g = geometry(&a.geometry, &mut ctx.settings)?;
    let r = resolve(&a.params, &mut ctx.settings)?;
    let n = ctx.settings.pick(a.events, "events", 1_000_000)?;
    let seed = ctx.settings.pick(a.seed, "seed", 1)?;
    r.record(&mut m);
    let stream = match &a.input {
        Some(path) => read(path, g, &mut m)?,
        None => {
            m.set("events", n);
            m.seeds.push(seed);
            m.rng = Some(RNG_ALGORITHM);
            synthetic_bench_stream(n, seed)?
        }
    };
    let t0 = Instant::now();
    let scored = run_algo(&stream, &r)?;
    let secs = t0.elapsed().as_secs_f64();
    let rate = meps(stream.len(), secs);
    println!("algo={} events={} seconds={secs:.6} meps={rate:.3}", r.algo, stream.len());
    if a.compare_hw {
        let other = Resolved { algo: if r.algo == AlgoSpec::DifHw { AlgoSpec::Dif } else { AlgoSpec::DifHw }, ..r };
        let hw = run_algo(&stream, &other)?;
        let agree = scored.iter().zip(&hw).filter(|(x, y)| x.pass == y.pass).count();
        let fraction = if scored.is_empty() { 1.0 } else { agree as f64 / scored.len() as f64 };
        println!("agreement {}/{}: {agree}/{} ({:.6})", r.algo, other.algo, scored.len(), fraction);
        m.extra.insert("agreement".into(), fraction.into());
    }
    if let Some(out) = &a.out {
        write(&passed_stream(&stream, &scored), out, &mut m)?;
    }
    m.events = Some(stream.len() as u64);
    m.meps = Some(rate);
    finish(ctx, m, start, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algo_names() {
        assert_eq!(AlgoSpec::parse("stcf", 3).unwrap(), AlgoSpec::Stcf(3));
        assert_eq!(AlgoSpec::parse("STCF2", 3).unwrap(), AlgoSpec::Stcf(2));
        assert_eq!(AlgoSpec::parse("dif-hw", 2).unwrap(), AlgoSpec::DifHw);
        assert!(AlgoSpec::parse("median", 2).is_err());
        for a in [AlgoSpec::Dif, AlgoSpec::Bif, AlgoSpec::DifHw, AlgoSpec::Nnb, AlgoSpec::Stcf(4)] {
            assert_eq!(AlgoSpec::parse(&a.to_string(), 1).unwrap(), a);
        }
    }

    #[test]
    fn cell_keys_normalize_rates() {
        let k = CellKey::parse("dif,16,2,1.0,3,10,20,0.9,0.8").unwrap();
        assert_eq!(k.rate, "1");
        assert!(CellKey::parse("dif,16,2").is_none());
    }
}
