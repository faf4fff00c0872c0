//! Declarative parameter sweeps over the qilab library, emitted as CSV or JSON.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod state;

use rayon::prelude::*;

pub use config::{Format, GridSpec, Scale, SweepConfig, Threads};
pub use dataset::{emit, Dataset, Row};
pub use error::{CliError, Result};

use commands::{Command, Point, Requirement};

/// Values of every input at every grid point, first input outermost.
fn grid_points(cmd: &Command, cfg: &SweepConfig) -> Result<Vec<Vec<f64>>> {
    for name in cfg.params.keys().chain(cfg.grids.keys()) {
        if !cmd.inputs.iter().any(|i| i.name == name) {
            let known: Vec<&str> = cmd.inputs.iter().map(|i| i.name).collect();
            return Err(CliError::Config(format!("`{}` has no parameter `{name}` (expects {known:?})", cmd.name)));
        }
    }
    let mut axes = Vec::with_capacity(cmd.inputs.len());
    for input in cmd.inputs {
        let name = input.name;
        let axis = match (cfg.params.get(name), cfg.grids.get(name)) {
            (Some(_), Some(_)) => return Err(CliError::Config(format!("`{name}` given both as a parameter and a grid"))),
            (Some(&v), None) => vec![v],
            (None, Some(g)) => {
                g.validate(name)?;
                g.points()
            }
            (None, None) => match input.default {
                Requirement::Value(v) => vec![v],
                Requirement::Absent => {
                    axes.push(vec![f64::NAN]);
                    continue;
                }
                Requirement::Required => return Err(CliError::Config(format!("`{}` needs parameter `{name}`", cmd.name))),
            },
        };
        if axis.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("`{name}` must be finite")));
        }
        axes.push(axis);
    }
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points.iter().flat_map(|p| axis.iter().map(move |&v| [p.as_slice(), &[v]].concat())).collect();
    }
    Ok(points)
}

fn eval_row(cmd: &Command, values: &[f64], states: Option<&(qilab::gaussian::GaussianState, qilab::gaussian::GaussianState)>) -> Row {
    let point = Point { inputs: cmd.inputs, values };
    match (cmd.eval)(&point, states) {
        Ok(values) => Row { values, error: None },
        Err(e) => {
            let values = cmd
                .columns
                .iter()
                .map(|c| cmd.inputs.iter().position(|i| i.name == *c).map_or(f64::NAN, |k| values[k]))
                .collect();
            Row { values, error: Some(e.to_string()) }
        }
    }
}

/// One row per grid point in grid order. Computation errors land in the
/// row's `error` field; configuration errors abort.
pub fn run(cfg: &SweepConfig) -> Result<Dataset> {
    let cmd = commands::find(&cfg.subcommand).ok_or_else(|| {
        let names: Vec<&str> = commands::COMMANDS.iter().map(|c| c.name).collect();
        CliError::Config(format!("unknown subcommand `{}` (one of {names:?})", cfg.subcommand))
    })?;
    let points = grid_points(cmd, cfg)?;
    let states = if cmd.needs_states {
        match (&cfg.state_a, &cfg.state_b) {
            (Some(a), Some(b)) => Some((state::load_state(a)?, state::load_state(b)?)),
            _ => return Err(CliError::Config(format!("`{}` needs --state-a and --state-b", cmd.name))),
        }
    } else {
        None
    };
    let threads = match cfg.threads {
        Threads::Auto => 0,
        Threads::Fixed(n) => n,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| points.par_iter().map(|p| eval_row(cmd, p, states.as_ref())).collect());
    Ok(Dataset { columns: cmd.columns.iter().map(|c| c.to_string()).collect(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_qfi_example() {
        let cfg = SweepConfig::new("gain-qfi").param("n", 6.0).param("m", 9.0).grid("g", 2.0, 2.0, 1, Scale::Linear);
        let ds = run(&cfg).unwrap();
        assert_eq!(ds.rows.len(), 1);
        assert_eq!(ds.column("k_nds").unwrap(), vec![7.5]);
        assert_eq!(ds.column("k_coh").unwrap(), vec![5.5]);
    }

    #[test]
    fn grid_order_is_nested() {
        let cfg = SweepConfig::new("ecb")
            .param("n", 6.0)
            .param("m", 9.0)
            .grid("g", 1.5, 2.5, 2, Scale::Linear)
            .grid("g_prime", 1.1, 1.3, 3, Scale::Linear);
        let ds = run(&cfg).unwrap();
        assert_eq!(ds.column("g").unwrap(), vec![1.5, 1.5, 1.5, 2.5, 2.5, 2.5]);
        assert_eq!(ds.column("g_prime").unwrap()[..3], [1.1, 1.2000000000000002, 1.3]);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(run(&SweepConfig::new("nope")), Err(CliError::Config(_))));
        assert!(matches!(run(&SweepConfig::new("gain-qfi").param("n", 1.0)), Err(CliError::Config(_))));
        let extra = SweepConfig::new("gain-threshold").param("n", 1.0).param("m", 1.0).param("eta_d", 0.5).param("x", 1.0);
        assert!(matches!(run(&extra), Err(CliError::Config(_))));
        let both = SweepConfig::new("gain-threshold").param("n", 1.0).param("m", 1.0).param("eta_d", 0.5).grid(
            "eta_d",
            0.5,
            0.9,
            2,
            Scale::Linear,
        );
        assert!(matches!(run(&both), Err(CliError::Config(_))));
        assert!(matches!(run(&SweepConfig::new("distinguish")), Err(CliError::Config(_))));
    }

    #[test]
    fn row_errors_do_not_abort() {
        let cfg = SweepConfig::new("gain-qfi").param("n", 6.0).param("m", 9.0).grid("g", 1.0, 2.0, 2, Scale::Linear);
        let ds = run(&cfg).unwrap();
        assert!(ds.rows[0].error.is_some());
        assert_eq!(ds.rows[0].values[0], 1.0);
        assert!(ds.rows[0].values[1].is_nan());
        assert!(ds.rows[1].error.is_none());
    }
}
