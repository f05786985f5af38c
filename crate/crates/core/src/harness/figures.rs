use std::path::{Path, PathBuf};

use super::config::FiguresConfig;
use super::output::{emit_plot, emit_svg, write_sweep_csv};
use crate::error::{Error, Result};
use crate::optimizer::sweep_curves;
use crate::shape::SweepRecord;

/// Files written by [`reproduce_figures`].
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSet {
    pub sweep_csv: PathBuf,
    pub curves: Vec<PathBuf>,
    pub gallery: PathBuf,
    pub ratio_plot: PathBuf,
    pub error_plot: PathBuf,
    pub records: Vec<SweepRecord>,
}

/// Union of the coarse and fine grids, ascending, with points closer than
/// `1e-9` merged.
pub fn merged_grid(config: &FiguresConfig) -> Result<Vec<f64>> {
    config.coarse.validate()?;
    config.fine.validate()?;
    let mut grid: Vec<f64> = config.coarse.points();
    grid.extend(config.fine.points());
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(grid)
}

/// Runs the continuation sweep and writes `sweep.csv`, one curve file per
/// exponent under `curves/`, the curve gallery and the `r(p)`, `e(p)` plots.
pub fn reproduce_figures(outdir: impl AsRef<Path>, config: &FiguresConfig) -> Result<FigureSet> {
    let outdir = outdir.as_ref();
    let curve_dir = outdir.join("curves");
    std::fs::create_dir_all(&curve_dir).map_err(|e| Error::io(&curve_dir, e))?;

    let grid = merged_grid(config)?;
    log::info!("sweeping {} exponents at n = {}", grid.len(), config.optimizer.n);
    let rows = sweep_curves(&grid, &config.optimizer)?;

    let mut curves = Vec::new();
    for (record, curve) in &rows {
        if let Some(curve) = curve {
            let path = curve_dir.join(format!("curve_p{:.3}.json", record.p));
            curve.save(&path)?;
            curves.push(path);
        }
    }
    let records: Vec<SweepRecord> = rows.iter().map(|(r, _)| *r).collect();
    let sweep_csv = outdir.join("sweep.csv");
    write_sweep_csv(&records, &sweep_csv)?;

    let mut shown = Vec::new();
    let mut labels = Vec::new();
    for &target in &config.gallery {
        let nearest = rows
            .iter()
            .filter(|(_, c)| c.is_some())
            .min_by(|a, b| (a.0.p - target).abs().total_cmp(&(b.0.p - target).abs()));
        if let Some((record, Some(curve))) = nearest {
            if !labels.iter().any(|l: &String| l == &format!("p = {:.3}", record.p)) {
                labels.push(format!("p = {:.3}", record.p));
                shown.push(curve.clone());
            }
        }
    }
    let gallery = outdir.join("gallery.svg");
    emit_svg(&shown, &labels, &gallery)?;

    let ratio_plot = outdir.join("ratio.svg");
    let ratios: Vec<(f64, f64)> = records.iter().map(|r| (r.p, r.r)).collect();
    emit_plot(&ratios, "widest / narrowest projection", "p", "r(p)", &ratio_plot)?;
    let error_plot = outdir.join("fit_error.svg");
    let errors: Vec<(f64, f64)> = records.iter().map(|r| (r.p, r.efit_log10)).collect();
    emit_plot(&errors, "conic fit residual", "p", "log10 e(p)", &error_plot)?;

    Ok(FigureSet {
        sweep_csv,
        curves,
        gallery,
        ratio_plot,
        error_plot,
        records,
    })
}
