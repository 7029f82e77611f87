//! Data-producing subcommands: curves, scattering tables, pole scans and
//! the figure datasets.

use std::path::{Path, PathBuf};

use isodelta::delta::{
    bare_potential, iso_potential, sample_ground_state, sample_iso_tail, sample_iso_wavefunction,
    singularity_scan, DeltaCoupling, SingularityReport,
};
use isodelta::spectral::scattering;
use isodelta::{Error, GridFunction, IsoParameter, ParameterClass};
use serde::Serialize;

use crate::config::{Format, RunConfig, UsageError, FIGURE_ONE_SET, FIGURE_THREE_SET};
use crate::table::{c_label, emit, grid_json, to_pretty_json, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Tail,
    Wavefunction,
}

/// One member's entry in the sidecar singularity report.
#[derive(Debug, Clone, Serialize)]
pub struct MemberSingularities {
    pub class: ParameterClass,
    #[serde(flatten)]
    pub report: SingularityReport,
    /// Grid nodes emitted as NaN markers.
    pub masked_x: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Curves {
    pub table: Table,
    pub singularities: Vec<MemberSingularities>,
}

impl Curves {
    pub fn has_singularities(&self) -> bool {
        self.singularities
            .iter()
            .any(|m| !m.report.is_empty() || !m.masked_x.is_empty())
    }
}

fn coupling(cfg: &RunConfig) -> anyhow::Result<DeltaCoupling> {
    Ok(DeltaCoupling::new(cfg.g)?)
}

fn forbidden_hint(c: &IsoParameter) -> anyhow::Error {
    UsageError(format!(
        "C = {} is in the {}: the family member is singular; pass --allow-singular to sample it with NaN markers",
        c.value(),
        c.class()
    ))
    .into()
}

/// Tail or wavefunction columns for every C of the config, optionally
/// preceded by the bare ground state.
pub fn curves(cfg: &RunConfig, kind: Curve, with_psi0: bool) -> anyhow::Result<Curves> {
    let g = coupling(cfg)?;
    let grid = cfg.grid()?;
    let mut columns = vec!["x".to_string()];
    let mut data: Vec<GridFunction> = Vec::new();
    if with_psi0 {
        columns.push("psi0".to_string());
        data.push(sample_ground_state(g, &grid)?);
    }
    let mut singularities = Vec::new();
    for &value in &cfg.c_list {
        let c = IsoParameter::new(value)?;
        if c.class() == ParameterClass::ForbiddenBand && !cfg.allow_singular {
            return Err(forbidden_hint(&c));
        }
        let column = match kind {
            Curve::Tail => sample_iso_tail(g, &c, &grid, cfg.allow_singular),
            Curve::Wavefunction => {
                if cfg.normalized && !c.is_normalizable() {
                    return Err(UsageError(format!(
                        "C = {value} ({}) has no normalizable state; pass --unnormalized",
                        c.class()
                    ))
                    .into());
                }
                sample_iso_wavefunction(g, &c, &grid, cfg.normalized, cfg.allow_singular)
            }
        };
        let column = match column {
            Err(Error::Singular(x)) => {
                return Err(UsageError(format!(
                    "C = {value} has a pole at x = {x} on the grid; pass --allow-singular"
                ))
                .into())
            }
            other => other?,
        };
        singularities.push(MemberSingularities {
            class: c.class(),
            report: singularity_scan(g, value, &grid),
            masked_x: column
                .singular_nodes()
                .into_iter()
                .map(|i| grid.x(i))
                .collect(),
        });
        columns.push(c_label(value));
        data.push(column);
    }
    let mut table = Table::new(columns);
    for (i, x) in grid.nodes().enumerate() {
        let mut row = vec![Cell::Num(x)];
        row.extend(data.iter().map(|f| Cell::Num(f.value(i))));
        table.push(row);
    }
    Ok(Curves {
        table,
        singularities,
    })
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("singularities.json")
}

pub fn sidecar_json(cfg: &RunConfig, curves: &Curves) -> anyhow::Result<String> {
    to_pretty_json(&serde_json::json!({
        "tool": "isodelta",
        "version": env!("CARGO_PKG_VERSION"),
        "g": cfg.g,
        "grid": grid_json(cfg),
        "members": curves.singularities,
    }))
}

fn gnuplot_script(data_file: &str, n_columns: usize, title: &str) -> String {
    format!(
        "# {title}\n\
         set datafile separator ','\n\
         set datafile missing 'nan'\n\
         set key autotitle columnhead\n\
         set xlabel 'x'\n\
         plot for [i=2:{n_columns}] '{data_file}' using 1:i with lines\n"
    )
}

/// Writes a curve table, its sidecar (when needed or forced) and the
/// optional gnuplot script.
fn write_curves(
    cfg: &RunConfig,
    command: &str,
    curves: &Curves,
    out: Option<&Path>,
    force_sidecar: bool,
) -> anyhow::Result<()> {
    emit(&curves.table.render(command, cfg)?, out)?;
    let sidecar = sidecar_json(cfg, curves)?;
    match out {
        Some(path) => {
            if force_sidecar || curves.has_singularities() {
                emit(&sidecar, Some(&sidecar_path(path)))?;
            }
            if cfg.gnuplot {
                if cfg.format != Format::Csv {
                    return Err(UsageError("--gnuplot needs --format csv".into()).into());
                }
                let name = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .unwrap_or_default();
                let script = gnuplot_script(name, curves.table.columns.len(), command);
                emit(&script, Some(&path.with_extension("gp")))?;
            }
        }
        None => {
            if curves.has_singularities() {
                eprint!("{sidecar}");
            }
            if cfg.gnuplot {
                return Err(UsageError("--gnuplot needs --out".into()).into());
            }
        }
    }
    Ok(())
}

pub fn cmd_family(cfg: &RunConfig) -> anyhow::Result<()> {
    let curves = curves(cfg, Curve::Tail, false)?;
    write_curves(cfg, "family", &curves, cfg.out.as_deref(), false)
}

/// Unnormalized output carries the bare ground state as a reference column.
pub fn cmd_wavefunction(cfg: &RunConfig) -> anyhow::Result<()> {
    let curves = curves(cfg, Curve::Wavefunction, !cfg.normalized)?;
    write_curves(cfg, "wavefunction", &curves, cfg.out.as_deref(), false)
}

pub fn scatter_table(cfg: &RunConfig) -> anyhow::Result<Table> {
    let g = coupling(cfg)?;
    let grid = cfg.grid()?;
    let bare = bare_potential(g, &grid)?;
    let columns = [
        "C", "k", "T2", "R2", "flux", "T2_delta", "dphase_T", "dphase_R",
    ];
    let mut table = Table::new(columns.iter().map(|s| s.to_string()).collect());
    let members = cfg
        .c_list
        .iter()
        .map(|&value| {
            let c = IsoParameter::new(value)?;
            if c.class() == ParameterClass::ForbiddenBand {
                return Err(forbidden_hint(&c));
            }
            Ok(iso_potential(g, &c, &grid, false)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    for &k in &cfg.k_list {
        let reference = scattering(&bare, k)?;
        let oracle = 4.0 * k * k / (4.0 * k * k + cfg.g * cfg.g);
        for (&c, potential) in cfg.c_list.iter().zip(&members) {
            let s = scattering(potential, k)?;
            table.push(vec![
                Cell::Num(c),
                Cell::Num(k),
                Cell::Num(s.transmission_probability()),
                Cell::Num(s.reflection_probability()),
                Cell::Num(s.flux()),
                Cell::Num(oracle),
                Cell::Num((s.transmission / reference.transmission).arg()),
                Cell::Num((s.reflection / reference.reflection).arg()),
            ]);
        }
    }
    Ok(table)
}

pub fn cmd_scatter(cfg: &RunConfig) -> anyhow::Result<()> {
    emit(
        &scatter_table(cfg)?.render("scatter", cfg)?,
        cfg.out.as_deref(),
    )
}

pub fn singularity_table(cfg: &RunConfig) -> anyhow::Result<Table> {
    let g = coupling(cfg)?;
    let grid = cfg.grid()?;
    let mut table = Table::new(vec!["C".into(), "x".into(), "half_line".into()]);
    for &c in &cfg.c_list {
        for pole in singularity_scan(g, c, &grid).locations {
            let side = match pole.half_line {
                isodelta::delta::HalfLine::Negative => "negative",
                isodelta::delta::HalfLine::Positive => "positive",
            };
            table.push(vec![Cell::Num(c), Cell::Num(pole.x), Cell::from(side)]);
        }
    }
    Ok(table)
}

pub fn cmd_singularities(cfg: &RunConfig) -> anyhow::Result<()> {
    emit(
        &singularity_table(cfg)?.render("singularities", cfg)?,
        cfg.out.as_deref(),
    )
}

/// The four figure datasets, in order.
pub fn figure_specs(cfg: &RunConfig) -> [(&'static str, RunConfig, Curve); 4] {
    let with = |set: &[f64], allow_singular: bool, normalized: bool| RunConfig {
        c_list: set.to_vec(),
        allow_singular,
        normalized,
        ..cfg.clone()
    };
    [
        (
            "fig1_family",
            with(&FIGURE_ONE_SET, false, true),
            Curve::Tail,
        ),
        (
            "fig2_wavefunction",
            with(&FIGURE_ONE_SET, false, true),
            Curve::Wavefunction,
        ),
        (
            "fig3_family",
            with(&FIGURE_THREE_SET, true, true),
            Curve::Tail,
        ),
        (
            "fig4_wavefunction",
            with(&FIGURE_THREE_SET, true, false),
            Curve::Wavefunction,
        ),
    ]
}

/// Writes every figure dataset into the output directory (default
/// `figures`); the singular sets always get a sidecar report.
pub fn cmd_figures(cfg: &RunConfig) -> anyhow::Result<()> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    for (name, fig, kind) in figure_specs(cfg) {
        let curves = curves(&fig, kind, kind == Curve::Wavefunction && !fig.normalized)?;
        let path = dir.join(format!("{name}.{}", cfg.format.extension()));
        write_curves(&fig, name, &curves, Some(&path), fig.allow_singular)?;
        println!("{}", path.display());
    }
    Ok(())
}
