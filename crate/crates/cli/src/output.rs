//! CSV rendering and file output. Floats use the shortest round-trip decimal form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use infobound::mclr::DensityGrid;
use infobound::SensitivityResult;

use crate::report::OracleRow;
use crate::CliError;

/// Shortest decimal string that parses back to `x` exactly.
pub fn fmt_f64(x: f64) -> String {
    ryu::Buffer::new().format(x).to_owned()
}

fn push_row(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(&f);
        first = false;
    }
    out.push('\n');
}

/// One row per threshold: `percentile,z,p_f,grad_<param>...,grad_norm_sq,tr_Fy,tr_Fx`.
pub fn curve_csv(param_names: &[String], curve: &[SensitivityResult], tr_fy: f64, tr_fx: f64) -> String {
    let mut out = String::new();
    push_row(
        &mut out,
        ["percentile", "z", "p_f"]
            .into_iter()
            .map(String::from)
            .chain(param_names.iter().map(|n| format!("grad_{n}")))
            .chain(["grad_norm_sq", "tr_Fy", "tr_Fx"].map(String::from)),
    );
    for r in curve {
        push_row(
            &mut out,
            [r.percentile.map_or_else(String::new, fmt_f64), fmt_f64(r.z), fmt_f64(r.p_f)]
                .into_iter()
                .chain(r.gradient.iter().map(|g| fmt_f64(*g)))
                .chain([fmt_f64(r.grad_norm_sq), fmt_f64(tr_fy), fmt_f64(tr_fx)]),
        );
    }
    out
}

/// One row per grid cell: output coordinates, density and its parameter derivatives.
pub fn density_csv(param_names: &[String], grid: &DensityGrid) -> String {
    let k = grid.axes().len();
    let mut out = String::new();
    push_row(
        &mut out,
        (0..k)
            .map(|i| format!("y{i}"))
            .chain(std::iter::once("density".to_string()))
            .chain(param_names.iter().map(|n| format!("d_{n}"))),
    );
    for cell in 0..grid.cells() {
        push_row(
            &mut out,
            grid.point(cell)
                .into_iter()
                .map(fmt_f64)
                .chain(std::iter::once(fmt_f64(grid.density()[cell])))
                .chain((0..grid.param_dim()).map(|j| fmt_f64(grid.density_grad(j)[cell]))),
        );
    }
    out
}

/// One row per `(θ, failure set)`; the set is written as `;`-separated cell indices.
pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::from("theta,failure_set,delta_pf_sq,quad_form,d1_sq,d1_sq_first_order,kl,satisfied\n");
    for r in rows {
        let set = r.failure_set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
        let o = &r.oracle;
        let satisfied = o.reports.iter().all(|b| b.satisfied);
        let _ = writeln!(
            out,
            "{},{set},{},{},{},{},{},{satisfied}",
            fmt_f64(r.theta),
            fmt_f64(o.delta_pf_sq),
            fmt_f64(o.quad_form),
            fmt_f64(o.d1_sq),
            fmt_f64(o.d1_sq_first_order),
            fmt_f64(o.kl)
        );
    }
    out
}

/// Writes each `(file name, contents)` pair into `dir`, creating it if needed.
pub fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for (name, text) in files {
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}
