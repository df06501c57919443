use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sixcyl_core::curve::{self, CurveSample};
use sixcyl_core::d3::{self, D3Params, D3Report};
use sixcyl_core::general::{self, FourCylBranch};
use sixcyl_core::numfmt::{sig, to_json_string, CSV_DIGITS};
use sixcyl_core::report::{self, ReportOptions};
use sixcyl_core::scene::{GapReport, SceneSpec};
use sixcyl_core::search::{self, FreeConfig, MultiStartOptions, OptResult, ProbeReport};
use sixcyl_core::{radius_from_distance, Configuration, TangentLine};

use crate::error::CliError;
use crate::{
    CurveArgs, EvalArgs, FourCylArgs, OptimizeArgs, ProbeArgs, ReportArgs, SceneArgs, UnlockArgs,
};

type Out = Result<String, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn angle_in(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn angle_out(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_degrees()
    } else {
        v
    }
}

#[derive(Serialize)]
struct EvalOutput {
    angle_unit: &'static str,
    phi: f64,
    delta: f64,
    kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<CurveSample>,
    dab_sq: f64,
    dad_sq: f64,
    dbd_sq: f64,
    dae_sq: f64,
    min_distance: f64,
    radius: Option<f64>,
    d3_symmetric: bool,
    configuration: Configuration,
}

pub fn eval(a: &EvalArgs) -> Out {
    let direct = [a.phi, a.delta, a.kappa];
    let given_direct = direct.iter().filter(|v| v.is_some()).count();
    let modes = usize::from(given_direct > 0)
        + usize::from(a.x.is_some())
        + usize::from(a.curve_phi.is_some());
    if modes != 1 {
        return Err(usage(
            "give exactly one of --phi/--delta/--kappa, --x or --curve-phi",
        ));
    }
    let (params, sample) = if given_direct > 0 {
        let [Some(phi), Some(delta), Some(kappa)] = direct else {
            return Err(usage("--phi, --delta and --kappa must be given together"));
        };
        let p = D3Params::new(
            angle_in(phi, a.degrees),
            angle_in(delta, a.degrees),
            angle_in(kappa, a.degrees),
        )?;
        (p, None)
    } else {
        let x = match (a.x, a.curve_phi) {
            (Some(x), _) => x,
            (_, Some(phi)) => curve::x_from_phi(angle_in(phi, a.degrees))?,
            _ => unreachable!("mode count checked above"),
        };
        let g = curve::gamma_point(x)?;
        (g.params, Some(g))
    };
    let D3Report {
        dab_sq,
        dad_sq,
        dbd_sq,
        dae_sq,
        min_distance,
        radius,
        d3_symmetric,
        ..
    } = d3::evaluate(&params)?;
    let out = EvalOutput {
        angle_unit: if a.degrees { "degrees" } else { "radians" },
        phi: angle_out(params.phi, a.degrees),
        delta: angle_out(params.delta, a.degrees),
        kappa: angle_out(params.kappa, a.degrees),
        curve: sample,
        dab_sq,
        dad_sq,
        dbd_sq,
        dae_sq,
        min_distance,
        radius,
        d3_symmetric,
        configuration: d3::build_c6(&params)?,
    };
    Ok(to_json_string(&out)?)
}

fn csv_row(out: &mut String, values: &[f64]) {
    let cells: Vec<String> = values.iter().map(|v| sig(*v, CSV_DIGITS)).collect();
    let _ = writeln!(out, "{}", cells.join(","));
}

fn emit(text: String, path: Option<&Path>) -> Out {
    match path {
        Some(p) => {
            fs::write(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn curve(a: &CurveArgs) -> Out {
    if a.samples == 0 {
        return Err(usage("--samples must be >= 1"));
    }
    let mut out = String::from("x,phi,delta,kappa,S,T,U,F,dae_sq\n");
    for i in 1..=a.samples {
        let x = i as f64 / a.samples as f64;
        let g = curve::gamma_point(x)?;
        let p = g.params;
        csv_row(
            &mut out,
            &[
                x,
                p.phi,
                p.delta,
                p.kappa,
                g.s_var,
                g.t_var,
                g.u_var,
                g.f_value,
                g.dae_sq()?,
            ],
        );
    }
    emit(out, a.out.as_deref())
}

#[derive(Serialize)]
struct RecordOutput {
    record: curve::RecordReport,
    configuration: Configuration,
}

pub fn record() -> Out {
    let record = curve::record();
    let configuration = d3::build_c6(&record.params)?;
    Ok(to_json_string(&RecordOutput {
        record,
        configuration,
    })?)
}

fn parse_configuration(text: &str) -> Result<Configuration, CliError> {
    if let Ok(c) = serde_json::from_str::<Configuration>(text) {
        return Ok(c);
    }
    if let Ok(lines) = serde_json::from_str::<Vec<TangentLine>>(text) {
        return Ok(Configuration::new(lines));
    }
    #[derive(serde::Deserialize)]
    struct Wrapped {
        configuration: Configuration,
    }
    serde_json::from_str::<Wrapped>(text)
        .map(|w| w.configuration)
        .map_err(|e| usage(format!("cannot read a configuration: {e}")))
}

/// Resolves `record`, `c6`, `curve:<x>` or `file:<path>`.
fn resolve(spec: &str) -> Result<Configuration, CliError> {
    match spec {
        "record" => Ok(d3::build_c6(&curve::record().params)?),
        "c6" => Ok(d3::build_c6(&D3Params::origin())?),
        _ => {
            if let Some(x) = spec.strip_prefix("curve:") {
                let x: f64 = x
                    .parse()
                    .map_err(|_| usage(format!("bad curve parameter '{x}'")))?;
                Ok(d3::build_c6(&curve::gamma_point(x)?.params)?)
            } else if let Some(path) = spec.strip_prefix("file:") {
                parse_configuration(&fs::read_to_string(path)?)
            } else {
                Err(usage(format!(
                    "unknown configuration '{spec}' (record, c6, curve:<x>, file:<path>)"
                )))
            }
        }
    }
}

#[derive(Serialize)]
struct OptimizeOutput<'a> {
    starts: usize,
    budget: usize,
    seed: u64,
    from: &'a str,
    #[serde(flatten)]
    result: &'a OptResult,
    configuration: Configuration,
}

pub fn optimize(a: &OptimizeArgs) -> Out {
    if a.starts == 0 {
        return Err(usage("--starts must be >= 1"));
    }
    if a.budget == 0 {
        return Err(usage("--budget must be >= 1"));
    }
    let mut opts = MultiStartOptions::new(a.starts, a.seed, a.budget);
    if let Some(from) = &a.from {
        opts.center = FreeConfig::from_configuration(&resolve(from)?)?;
        opts.include_center = true;
        opts.curve_seeds.clear();
    }
    let result = search::multi_start_with(&opts)?;
    let out = OptimizeOutput {
        starts: a.starts,
        budget: a.budget,
        seed: a.seed,
        from: a.from.as_deref().unwrap_or("c6+curve"),
        configuration: result.configuration()?,
        result: &result,
    };
    Ok(to_json_string(&out)?)
}

#[derive(Serialize)]
struct ProbeOutput<'a> {
    at: &'a str,
    #[serde(flatten)]
    report: ProbeReport,
}

pub fn probe(a: &ProbeArgs) -> Out {
    let chart = FreeConfig::from_configuration(&resolve(&a.at)?)?;
    let report = search::perturbation_probe(&chart, a.radius, a.trials, a.seed)?;
    Ok(to_json_string(&ProbeOutput { at: &a.at, report })?)
}

pub fn unlock_check(a: &UnlockArgs) -> Out {
    let report = general::unlock_verdict(angle_in(a.alpha, a.degrees))?;
    Ok(to_json_string(&report)?)
}

pub fn four_cyl(a: &FourCylArgs) -> Out {
    if a.samples < 2 {
        return Err(usage("--samples must be >= 2"));
    }
    if !(a.t_max > 0.0 && a.t_max.is_finite()) {
        return Err(usage("--t-max must be > 0"));
    }
    let branch = if a.mirror {
        FourCylBranch::Mirror
    } else {
        FourCylBranch::Principal
    };
    let mut out =
        String::from("T,S,U,phi,delta,kappa,dab_sq,dad_sq,dbd_sq,parallel_ae,parallel_bd\n");
    for i in 0..a.samples {
        let t = a.t_max * i as f64 / (a.samples - 1) as f64;
        let p = general::four_cyl_point_on(t, branch)?;
        let [ab, ad, bd] = p.distances_sq;
        let [pae, pbd] = p.parallel_residuals;
        csv_row(
            &mut out,
            &[
                t,
                p.s_var,
                p.u_var,
                p.params.phi,
                p.params.delta,
                p.params.kappa,
                ab,
                ad,
                bd,
                pae,
                pbd,
            ],
        );
    }
    emit(out, a.out.as_deref())
}

#[derive(Serialize)]
struct SceneOutput<'a> {
    path: String,
    radius: f64,
    cyl_length: f64,
    segments: usize,
    gaps: &'a GapReport,
}

pub fn export_scene(a: &SceneArgs) -> Out {
    let cfg = resolve(&a.at)?;
    let radius = match a.radius {
        Some(r) => r,
        None => radius_from_distance(cfg.min_distance()?)?,
    };
    let spec = SceneSpec::with_mesh(cfg, radius, a.cyl_length, a.segments)?;
    fs::write(&a.out, spec.to_obj())?;
    let gaps = spec.gap_report();
    Ok(to_json_string(&SceneOutput {
        path: a.out.display().to_string(),
        radius,
        cyl_length: a.cyl_length,
        segments: a.segments,
        gaps: &gaps,
    })?)
}

pub fn report_all(a: &ReportArgs) -> Out {
    let opts = if a.inject_fault {
        ReportOptions::with_fault()
    } else {
        ReportOptions::default()
    };
    let report = report::run_all(&opts);
    let text = if a.json {
        to_json_string(&report)?
    } else {
        report.render_text()
    };
    if report.all_passed {
        Ok(text)
    } else {
        Err(CliError::Verification(text))
    }
}
