use std::path::Path;

use gcf_core::quantize::quantized_perturbation;
use gcf_core::sensitivity::{hn_freq_response, nominal_response, perturbed_response};
use gcf_core::zeros::{oracle_displacement_hn, oracle_displacement_hp};
use gcf_core::{
    deltapqn_sweep, displacement_hn, displacement_hp, error_function, freq_response, gcf_tf,
    nominal_zeros_hn, nominal_zeros_hp, CascadeSpec, FrequencyGrid, PartialPolyphaseDecimator,
    PerturbationConfig, RealPolynomial, SweepTemplate,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::output::{db, emit, pretty, Cell, Table};
use crate::report::DesignReport;
use crate::{CliError, Command, FilterArgs, InputKind, OutputArgs};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Design { filter, out } => design(&filter, out.as_deref()),
        Command::Freqresp {
            filter,
            grid,
            quantize,
            output,
        } => write(&freqresp(&filter, grid, quantize)?, &output),
        Command::Sensitivity {
            filter,
            grid,
            delta_h,
            delta_r,
            output,
        } => write(&sensitivity(&filter, grid, delta_h, delta_r)?, &output),
        Command::Zeros {
            filter,
            delta_h,
            delta_r,
            oracle,
            output,
        } => write(&zeros(&filter, delta_h, delta_r, oracle)?, &output),
        Command::Qnsweep {
            d1,
            dh,
            q,
            nu,
            b,
            se,
            output,
        } => {
            let template = SweepTemplate { q, nu, b, se };
            write(&qnsweep(&d1, &dh, &template)?, &output)
        }
        Command::Simulate {
            filter,
            input,
            input_file,
            len,
            seed,
            filter_file,
            output,
        } => {
            let decimator = match filter_file {
                Some(path) => read_report(&path)?.decimator()?,
                None => PartialPolyphaseDecimator::new(&filter.cascade_spec()?)?,
            };
            let samples = source(input, input_file.as_deref(), len, seed)?;
            write(&simulate(decimator, &samples), &output)
        }
    }
}

fn write(table: &Table, output: &OutputArgs) -> Result<(), CliError> {
    emit(&table.render(output.format), output.out.as_deref())
}

fn design(filter: &FilterArgs, out: Option<&Path>) -> Result<(), CliError> {
    let spec = filter.gcf_spec()?;
    let cascade = if spec.order == 3 {
        Some(filter.cascade(&spec)?)
    } else {
        None
    };
    let report = DesignReport::build(&spec, cascade.as_ref())?;
    let value = serde_json::to_value(&report)
        .map_err(|e| CliError::Runtime(format!("cannot serialize report: {e}")))?;
    emit(&pretty(&value), out)
}

fn grid(points: usize) -> Result<FrequencyGrid, CliError> {
    Ok(FrequencyGrid::uniform(points)?)
}

fn third_order(filter: &FilterArgs, what: &str) -> Result<CascadeSpec, CliError> {
    if filter.order != 3 {
        return Err(CliError::Validation(format!(
            "{what} needs the third-order polyphase structure, got --order {}",
            filter.order
        )));
    }
    filter.cascade_spec()
}

fn hn_gain(spec: &CascadeSpec) -> f64 {
    spec.stage_multipliers()
        .iter()
        .map(|r| 2.0 + 2.0 * r)
        .product()
}

pub fn freqresp(
    filter: &FilterArgs,
    points: usize,
    quantize: Option<f64>,
) -> Result<Table, CliError> {
    let spec = filter.gcf_spec()?;
    let grid = grid(points)?;
    let mut columns = vec!["f_d", "mag_db", "phase_rad"];
    let mut extra: Vec<Vec<Complex64>> = Vec::new();

    let total = if spec.order == 3 {
        let cascade = filter.cascade(&spec)?;
        let h_p = RealPolynomial::new(gcf_core::split(&cascade)?.h_p.taps)?;
        columns.push("hp_db");
        extra.push(freq_response(&h_p, &grid));
        if !cascade.cascade_indices().is_empty() {
            let gain = hn_gain(&cascade);
            columns.push("hn_db");
            extra.push(
                hn_freq_response(&cascade, &grid)?
                    .into_iter()
                    .map(|h| h / gain)
                    .collect(),
            );
        }
        let total = nominal_response(&cascade, &grid)?;
        if let Some(eps) = quantize {
            let pert = quantized_perturbation(&cascade, eps)?;
            columns.push("mag_db_quantized");
            extra.push(perturbed_response(&cascade, &pert, &grid)?);
        }
        total
    } else {
        if quantize.is_some() {
            return Err(CliError::Validation(
                "--quantize needs the third-order polyphase structure".into(),
            ));
        }
        freq_response(&gcf_tf(&spec)?, &grid)
    };

    let mut table = Table::new(columns);
    for (i, f) in grid.points().iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            (*f).into(),
            db(total[i].norm()).into(),
            total[i].arg().into(),
        ];
        row.extend(extra.iter().map(|c| Cell::from(db(c[i].norm()))));
        table.push(row);
    }
    Ok(table)
}

pub fn sensitivity(
    filter: &FilterArgs,
    points: usize,
    delta_h: f64,
    delta_r: f64,
) -> Result<Table, CliError> {
    let cascade = third_order(filter, "sensitivity")?;
    let grid = grid(points)?;
    let pert = PerturbationConfig::uniform(&cascade, delta_h, delta_r);
    let terms = error_function(&cascade, &pert, &grid)?;
    let total = terms.total();
    let mut columns = vec!["f_d".to_owned(), "dh1_db".to_owned()];
    columns.extend(terms.stage_indices.iter().map(|u| format!("dh2_u{u}_db")));
    columns.push("dh_db".into());
    let mut table = Table::new(columns);
    for (i, f) in grid.points().iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*f).into(), db(terms.dh1[i].norm()).into()];
        row.extend(terms.dh2.iter().map(|t| Cell::from(db(t[i].norm()))));
        row.push(db(total[i].norm()).into());
        table.push(row);
    }
    Ok(table)
}

pub fn zeros(
    filter: &FilterArgs,
    delta_h: f64,
    delta_r: f64,
    oracle: bool,
) -> Result<Table, CliError> {
    let cascade = third_order(filter, "zeros")?;
    let mut columns = vec![
        "section",
        "stage",
        "re",
        "im",
        "angle_rad",
        "dz_re",
        "dz_im",
        "dz_abs",
    ];
    if oracle {
        columns.extend(["oracle_dz_abs", "oracle_rel_err"]);
    }
    let mut table = Table::new(columns);
    let mut push = |section: &str,
                    stage: Option<u32>,
                    z: Complex64,
                    dz: Complex64,
                    measured: Option<Complex64>| {
        let mut row: Vec<Cell> = vec![
            section.into(),
            stage.map_or(Cell::Text(String::new()), Cell::from),
            z.re.into(),
            z.im.into(),
            z.arg().into(),
            dz.re.into(),
            dz.im.into(),
            dz.norm().into(),
        ];
        if let Some(m) = measured {
            row.push(m.norm().into());
            row.push(((dz - m).norm() / m.norm()).into());
        }
        table.push(row);
    };

    if cascade.d1() >= 2 {
        let dh = vec![delta_h; cascade.polyphase_len()];
        let nominal = nominal_zeros_hp(&cascade)?;
        let predicted = displacement_hp(&cascade, &dh)?;
        let measured = oracle
            .then(|| oracle_displacement_hp(&cascade, &dh))
            .transpose()?;
        for (i, (z, dz)) in nominal.zeros.iter().zip(&predicted).enumerate() {
            push("h_p", None, *z, *dz, measured.as_ref().map(|m| m[i]));
        }
    }
    let stages = cascade.cascade_indices().len();
    if stages > 0 {
        let dr = vec![delta_r; stages];
        let nominal = nominal_zeros_hn(&cascade)?;
        let predicted = displacement_hn(&cascade, &dr)?;
        let measured = oracle
            .then(|| oracle_displacement_hn(&cascade, &dr))
            .transpose()?;
        let owners = nominal.stages.clone().unwrap_or_default();
        for (i, (z, dz)) in nominal.zeros.iter().zip(&predicted).enumerate() {
            push(
                "h_n",
                owners.get(i).copied(),
                *z,
                *dz,
                measured.as_ref().map(|m| m[i]),
            );
        }
    }
    Ok(table)
}

pub fn qnsweep(d1s: &[usize], dhs: &[f64], template: &SweepTemplate) -> Result<Table, CliError> {
    let sweep = deltapqn_sweep(d1s, dhs, template)?;
    let mut table = Table::new(["d1", "dh", "delta_pqn_db"]);
    for (d1, row) in sweep.d1s.iter().zip(&sweep.values) {
        for (dh, v) in sweep.dhs.iter().zip(row) {
            table.push(vec![(*d1).into(), (*dh).into(), (*v).into()]);
        }
    }
    Ok(table)
}

fn read_report(path: &Path) -> Result<DesignReport, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("{} is not a filter report: {e}", path.display()))
    })
}

fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            line.parse::<f64>().map_err(|e| {
                CliError::Validation(format!(
                    "{}:{}: bad sample {line:?}: {e}",
                    path.display(),
                    i + 1
                ))
            })
        })
        .collect()
}

pub fn source(
    kind: InputKind,
    file: Option<&Path>,
    len: usize,
    seed: u64,
) -> Result<Vec<f64>, CliError> {
    match kind {
        InputKind::File => {
            let path =
                file.ok_or_else(|| CliError::Validation("--input file needs --input-file".into()))?;
            read_samples(path)
        }
        _ if len == 0 => Err(CliError::Validation("--len must be positive".into())),
        InputKind::Impulse => {
            let mut x = vec![0.0; len];
            x[0] = 1.0;
            Ok(x)
        }
        InputKind::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
        }
    }
}

/// Decimated output including the tail of the full convolution.
pub fn simulate(mut decimator: PartialPolyphaseDecimator, samples: &[f64]) -> Table {
    let mut y = decimator.process(samples);
    y.extend(decimator.finish());
    let mut table = Table::new(["n", "y"]);
    for (n, v) in y.into_iter().enumerate() {
        table.push(vec![n.into(), v.into()]);
    }
    table
}
