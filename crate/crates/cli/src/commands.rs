use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use collective_dfs::dynamics::{evolve, system_hamiltonian, tau2, DensityMatrix, Generator};
use collective_dfs::encodings::{four_qubit_basis, omega_encoding, RealCouplings};
use collective_dfs::metrics::{
    fig1_series, product_optimum, write_fig1_csv, write_fig2_csv, write_fig2_series_csv, JtotRow,
};
use collective_dfs::qubit_space::{bit_label, QubitCount, StateVector};
use collective_dfs::report::format_significant;
use collective_dfs::structure::{
    cdfs, df_subspace, irrep_decompose, remainder, spin_multiplicities, SubspaceBasis,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::model::{CouplingSpec, ModelSpec};
use crate::states;
use crate::Figure;

/// Amplitudes below this are not printed.
const PRINT_TOL: f64 = 1e-12;

/// Step used when `--dt` is omitted, in units of the inverse spectral scale.
pub const DEFAULT_STEP_SCALE: f64 = 0.02;

/// Write to `path`, or to `stdout` when no path is given.
fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, body: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

pub fn decompose(n: usize, out: &mut dyn Write) -> CliResult<()> {
    let q = QubitCount::new(n)?;
    let towers = irrep_decompose(q)?;
    writeln!(out, "n = {n}")?;
    for (spin, count) in spin_multiplicities(&towers).iter().rev() {
        writeln!(out, "J={spin} x{count}")?;
    }
    for k in 0..=n / 2 {
        writeln!(out, "dim V({k}) = {}", df_subspace(q, k)?.dim())?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct StateReport {
    /// `(bitstring, [re, im])` for every printed amplitude.
    amplitudes: Vec<(String, [f64; 2])>,
    /// `None` for stationary states (infinite time scale).
    tau2: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SectorReport {
    k: usize,
    df_dimension: usize,
    cdfs_dimension: usize,
    iterations: usize,
    basis: Vec<StateReport>,
    remainder: Vec<StateReport>,
}

fn nonzero_amplitudes(n: QubitCount, state: &StateVector) -> Vec<(String, [f64; 2])> {
    let clean = |x: f64| if x.abs() < PRINT_TOL { 0.0 } else { x };
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > PRINT_TOL)
        .map(|(idx, z)| (bit_label(n, idx), [clean(z.re), clean(z.im)]))
        .collect()
}

fn amplitude_text(z: [f64; 2]) -> String {
    let re = format_significant(z[0], 10);
    if z[1] == 0.0 {
        re
    } else if z[0] == 0.0 {
        format!("{}i", format_significant(z[1], 10))
    } else {
        let sign = if z[1] < 0.0 { '-' } else { '+' };
        format!("({re}{sign}{}i)", format_significant(z[1].abs(), 10))
    }
}

fn state_text(report: &StateReport) -> String {
    let mut text = String::new();
    for (i, (bits, z)) in report.amplitudes.iter().enumerate() {
        let term = amplitude_text(*z);
        match (i, term.strip_prefix('-')) {
            (0, _) => text.push_str(&term),
            (_, Some(rest)) => text.push_str(&format!(" - {rest}")),
            (_, None) => text.push_str(&format!(" + {term}")),
        }
        text.push_str(&format!(" |{bits}>"));
    }
    text
}

fn tau2_text(t: Option<f64>) -> String {
    t.map_or_else(|| "inf".to_owned(), |v| format_significant(v, 10))
}

pub fn cdfs_report(model_path: &Path, k: Option<usize>, json: bool, out: &mut dyn Write) -> CliResult<()> {
    let spec = ModelSpec::from_path(model_path)?;
    let n = spec.qubits()?;
    let model = spec.to_model()?;
    let h = system_hamiltonian(&model, n)?;
    let sectors: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (0..=n.get() / 2).collect(),
    };
    let describe = |basis: &SubspaceBasis, with_tau: bool| -> CliResult<Vec<StateReport>> {
        basis
            .vectors()
            .iter()
            .map(|v| {
                let t = if with_tau { tau2(v, &h)? } else { f64::INFINITY };
                Ok(StateReport { amplitudes: nonzero_amplitudes(n, v), tau2: t.is_finite().then_some(t) })
            })
            .collect()
    };
    let mut reports = Vec::with_capacity(sectors.len());
    for k in sectors {
        let df = df_subspace(n, k)?;
        let found = cdfs(n, k, &h)?;
        let rest = remainder(&df, &found.basis)?;
        reports.push(SectorReport {
            k,
            df_dimension: df.dim(),
            cdfs_dimension: found.basis.dim(),
            iterations: found.iterations,
            basis: describe(&found.basis, false)?,
            remainder: describe(&rest, true)?,
        });
    }

    if json {
        serde_json::to_writer_pretty(&mut *out, &reports)?;
        writeln!(out)?;
        return Ok(());
    }
    writeln!(out, "n = {}", n.get())?;
    for r in &reports {
        writeln!(out, "k = {}: DF dimension {}, CDFS dimension {}, iterations {}", r.k, r.df_dimension, r.cdfs_dimension, r.iterations)?;
        for (i, s) in r.basis.iter().enumerate() {
            writeln!(out, "  cdfs[{i}] = {}", state_text(s))?;
        }
        for (i, s) in r.remainder.iter().enumerate() {
            writeln!(out, "  remainder[{i}] = {}", state_text(s))?;
            writeln!(out, "    tau2 = {}", tau2_text(s.tau2))?;
        }
    }
    Ok(())
}

pub struct EvolveOptions {
    pub model: PathBuf,
    pub state: String,
    pub t: f64,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub no_dissipator: bool,
}

pub fn evolve_run(opts: &EvolveOptions, stdout: &mut dyn Write) -> CliResult<()> {
    let spec = ModelSpec::from_path(&opts.model)?;
    let n = spec.qubits()?;
    let mut model = spec.to_model()?;
    if opts.no_dissipator {
        model = model.without_dissipation();
    }
    let psi = states::resolve(&opts.state, &spec)?;
    let rho0 = DensityMatrix::pure(&psi)?;
    let dt = match opts.dt {
        Some(dt) => dt,
        None => {
            let scale = Generator::new(&model, n)?.spectral_scale();
            if scale > 0.0 {
                DEFAULT_STEP_SCALE / scale
            } else {
                opts.t / 100.0
            }
        }
    };
    let traj = evolve(&rho0, &model, opts.t, dt)?;

    // summary goes to stderr when the CSV occupies stdout
    let mut summary = String::new();
    let fidelity = traj.fidelity.last().copied().unwrap_or(1.0);
    summary.push_str(&format!(
        "steps {}, final t {}, final fidelity {}",
        traj.len() - 1,
        format_significant(opts.t, 10),
        format_significant(fidelity, 12)
    ));
    if n.get() == 4 && states::is_omega(&opts.state) {
        let basis = four_qubit_basis();
        let leakage = traj
            .states
            .iter()
            .map(|rho| {
                let inside: f64 = ['f', 'g', 'h'].iter().map(|&l| rho.population(basis.state(l).expect("named"))).sum();
                rho.trace() - inside
            })
            .fold(0.0, f64::max);
        summary.push_str(&format!(", max leakage out of span{{f,g,h}} {}", format_significant(leakage, 6)));
    }

    match &opts.out {
        Some(path) => {
            with_output(Some(path), stdout, |w| traj.write_csv(w))?;
            writeln!(stdout, "{summary}")?;
        }
        None => {
            traj.write_csv(&mut *stdout)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn write_fig1(fig: Figure, w: &mut dyn Write) -> std::io::Result<()> {
    let points = fig1_series();
    match fig {
        Figure::Fig1a => {
            writeln!(w, "r,d_df,p_df")?;
            for p in &points {
                writeln!(w, "{},{},{}", format_significant(p.r, 12), format_significant(p.d_df, 12), format_significant(p.p_df, 12))?;
            }
        }
        _ => {
            writeln!(w, "r,product")?;
            for p in &points {
                writeln!(w, "{},{}", format_significant(p.r, 12), format_significant(p.product, 12))?;
            }
        }
    }
    Ok(())
}

pub fn metrics(fig: Figure, n: usize, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    if fig == Figure::Fig2 {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(CliError::Input(format!("--n must be even and at least 2, got {n}")));
        }
        return with_output(out, stdout, |w| write_fig2_csv(n, w));
    }
    with_output(out, stdout, |w| write_fig1(fig, w))?;
    if out.is_some() && fig == Figure::Fig1b {
        writeln!(stdout, "maximum at r = {}", format_significant(product_optimum(), 6))?;
    }
    Ok(())
}

/// Read `b` from a model file or a bare coupling spec for four qubits.
fn four_qubit_couplings(path: &Path) -> CliResult<RealCouplings> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let matrix = match ModelSpec::from_json(&text) {
        Ok(spec) if spec.n == 4 => spec.b_matrix()?,
        Ok(spec) => return Err(CliError::Input(format!("encode4 needs n = 4, got {}", spec.n))),
        Err(model_err) => match serde_json::from_str::<CouplingSpec>(&text) {
            Ok(b) => b.matrix(4)?,
            Err(_) => return Err(model_err),
        },
    };
    Ok(RealCouplings::from_matrix(&matrix)?)
}

pub fn encode4(b_path: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let b = four_qubit_couplings(b_path)?;
    let enc = omega_encoding(&b)?;
    let export = enc.export(&b)?;
    with_output(out, stdout, |w| {
        serde_json::to_writer_pretty(&mut *w, &export)?;
        writeln!(w)
    })?;
    if export.degenerate {
        return Err(CliError::Degenerate(format!(
            "Omega1 = {}, Omega2 = {}: the encoding direction is undefined",
            export.omega1, export.omega2
        )));
    }
    Ok(())
}

/// Even register sizes in the Fig. 2 sweep.
pub fn fig2_sweep(max_n: usize) -> Vec<usize> {
    (6..=max_n).step_by(2).collect()
}

pub fn reproduce_figures(out_dir: &Path, max_n: usize, stdout: &mut dyn Write) -> CliResult<()> {
    if max_n < 6 || !max_n.is_multiple_of(2) {
        return Err(CliError::Input(format!("--max-n must be even and at least 6, got {max_n}")));
    }
    std::fs::create_dir_all(out_dir)?;
    let fig1 = out_dir.join("fig1.csv");
    let fig2 = out_dir.join("fig2.csv");
    let series = out_dir.join("fig2_series.csv");

    with_output(Some(&fig1), stdout, |w| write_fig1_csv(&fig1_series(), w))?;
    with_output(Some(&fig2), stdout, |w| write_fig2_csv(max_n, w))?;
    let rows = fig2_sweep(max_n)
        .into_par_iter()
        .map(JtotRow::new)
        .collect::<Result<Vec<_>, _>>()?;
    with_output(Some(&series), stdout, |w| write_fig2_series_csv(&rows, w))?;

    for p in [&fig1, &fig2, &series] {
        writeln!(stdout, "wrote {}", p.display())?;
    }
    Ok(())
}
