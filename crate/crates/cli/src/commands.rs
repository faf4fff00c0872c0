use qilab::covert::{
    analytic_exponents, ecovert_error_floor, gcs_bhattacharyya_exponent, gcs_exponent, kkt_energy_band,
    max_covert_brightness, perfect_gcs_exponent, perfect_tmsv_exponent, tmsv_exponent, tmsv_return_states,
};
use qilab::distinguish::{bhattacharyya, chernoff, fidelity_gaussian, fvg_bounds};
use qilab::gain::{
    cecb_distance, ecb_distance, fi_homodyne_heterodyne, mse_coherent, mse_number, qfi_coherent, qfi_coherent_lossy,
    qfi_nds, qfi_number_lossy, threshold_gain,
};
use qilab::gaussian::GaussianState;
use qilab::spes::{bhattacharyya_exponent_nps, mmpc_exponent, mmpc_optimal, mmpdc_exponent, NpsProbe, NpsScenario};
use qilab::{Error, Result};

const LOSSY_CUTOFF: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Requirement {
    Required,
    Value(f64),
    /// May be left out; the point then carries NaN.
    Absent,
}

#[derive(Debug, Clone, Copy)]
pub struct Input {
    pub name: &'static str,
    pub default: Requirement,
}

const fn req(name: &'static str) -> Input {
    Input { name, default: Requirement::Required }
}

const fn opt(name: &'static str, default: f64) -> Input {
    Input { name, default: Requirement::Value(default) }
}

const fn maybe(name: &'static str) -> Input {
    Input { name, default: Requirement::Absent }
}

pub type Eval = fn(&Point, Option<&(GaussianState, GaussianState)>) -> Result<Vec<f64>>;

pub struct Command {
    pub name: &'static str,
    /// Grid axes nest in this order, first outermost.
    pub inputs: &'static [Input],
    pub columns: &'static [&'static str],
    pub needs_states: bool,
    pub eval: Eval,
}

/// Values of a command's inputs at one grid point.
pub struct Point<'a> {
    pub inputs: &'a [Input],
    pub values: &'a [f64],
}

impl Point<'_> {
    pub fn get(&self, name: &str) -> f64 {
        let k = self.inputs.iter().position(|i| i.name == name).expect("declared input");
        self.values[k]
    }

    pub fn get_opt(&self, name: &str) -> Option<f64> {
        Some(self.get(name)).filter(|v| !v.is_nan())
    }

    fn modes(&self, name: &str) -> Result<usize> {
        let v = self.get(name).round();
        if !(v >= 1.0 && v < 1e15) {
            return Err(Error::OutOfRange { what: "mode count >= 1", value: self.get(name) });
        }
        Ok(v as usize)
    }
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "perfect-covert",
        inputs: &[req("eta"), req("n_b")],
        columns: &[
            "n_b", "chi_tmsv_qc", "chi_tmsv_qb", "chi_tmsv_analytic", "chi_gcs_qc", "chi_gcs_qb", "chi_gcs_analytic", "ratio_qc",
        ],
        needs_states: false,
        eval: perfect_covert,
    },
    Command {
        name: "covert-energy",
        inputs: &[req("eta"), req("n_b"), req("eps"), req("m")],
        columns: &["m", "ns_min", "ns_max"],
        needs_states: false,
        eval: covert_energy,
    },
    Command {
        name: "covert-bound",
        inputs: &[req("eta"), req("n_b"), req("eps"), req("m")],
        columns: &["m", "pe_floor", "pe_tmsv", "pe_gcs", "ns_covert"],
        needs_states: false,
        eval: covert_bound,
    },
    Command {
        name: "gain-qfi",
        inputs: &[req("n"), req("m"), req("g")],
        columns: &["g", "k_nds", "k_coh", "j_hom", "j_het"],
        needs_states: false,
        eval: gain_qfi,
    },
    Command {
        name: "gain-mse",
        inputs: &[req("n"), req("m"), opt("eta_d", 1.0), req("g")],
        columns: &["g", "qcrb_num", "qcrb_coh", "mse_num", "mse_coh"],
        needs_states: false,
        eval: gain_mse,
    },
    Command {
        name: "gain-threshold",
        inputs: &[req("n"), req("m"), req("eta_d")],
        columns: &["eta_d", "g_star"],
        needs_states: false,
        eval: gain_threshold,
    },
    Command {
        name: "ecb",
        inputs: &[req("n"), req("m"), req("g"), req("g_prime")],
        columns: &["g", "g_prime", "b_quantum", "b_classical", "ratio"],
        needs_states: false,
        eval: ecb,
    },
    Command {
        name: "spes",
        inputs: &[req("eta"), req("n_b"), maybe("kappa_mmpc"), opt("kappa_mmpdc", 0.5), req("n_s")],
        columns: &["n_s", "chi_spes", "chi_tmsv", "chi_coh", "chi_mmpc", "chi_mmpdc"],
        needs_states: false,
        eval: spes,
    },
    Command {
        name: "distinguish",
        inputs: &[],
        columns: &["fidelity", "c_half", "chernoff", "s_star", "pe_lower", "pe_upper"],
        needs_states: true,
        eval: distinguish,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

type States<'a> = Option<&'a (GaussianState, GaussianState)>;

fn perfect_covert(p: &Point, _: States) -> Result<Vec<f64>> {
    let (eta, n_b) = (p.get("eta"), p.get("n_b"));
    let tmsv_qc = perfect_tmsv_exponent(eta, n_b)?.exponent;
    let (h0, h1) = tmsv_return_states(eta, n_b, n_b);
    let tmsv_qb = bhattacharyya(&h0, &h1)?.exponent;
    let gcs_qc = perfect_gcs_exponent(eta, n_b)?;
    let gcs_qb = gcs_bhattacharyya_exponent(eta, n_b, n_b)?;
    let (tmsv_an, gcs_an, _) = analytic_exponents(eta, n_b);
    Ok(vec![n_b, tmsv_qc, tmsv_qb, tmsv_an, gcs_qc, gcs_qb, gcs_an, tmsv_qc / gcs_qc])
}

fn covert_energy(p: &Point, _: States) -> Result<Vec<f64>> {
    let m = p.modes("m")?;
    let band = kkt_energy_band(p.get("n_b"), m, p.get("eps"), p.get("eta"), None)?;
    Ok(vec![m as f64, band.ns_min, band.ns_max])
}

fn covert_bound(p: &Point, _: States) -> Result<Vec<f64>> {
    let (eta, n_b, eps) = (p.get("eta"), p.get("n_b"), p.get("eps"));
    let m = p.modes("m")?;
    let mf = m as f64;
    let floor = ecovert_error_floor(eta, n_b, m, eps)?;
    let ns = max_covert_brightness(eta, n_b, m, eps)?;
    let pe_tmsv = 0.5 * (-mf * tmsv_exponent(eta, n_b, ns)?.exponent).exp();
    let pe_gcs = 0.5 * (-mf * gcs_exponent(eta, n_b, ns)?).exp();
    Ok(vec![mf, floor, pe_tmsv, pe_gcs, ns])
}

fn gain_qfi(p: &Point, _: States) -> Result<Vec<f64>> {
    let (n, m, g) = (p.get("n"), p.modes("m")?, p.get("g"));
    let (_, k_nds) = qfi_nds(n, m, g)?;
    let k_coh = qfi_coherent(n, m, g)?;
    let (j_hom, j_het) = fi_homodyne_heterodyne(n, m, g);
    Ok(vec![g, k_nds, k_coh, j_hom, j_het])
}

/// N photons spread over M modes as evenly as possible.
fn spread(n: f64, m: usize) -> Result<Vec<usize>> {
    if n < 0.0 || (n - n.round()).abs() > 1e-9 {
        return Err(Error::OutOfRange { what: "integer N for a lossy number probe", value: n });
    }
    let n = n.round() as usize;
    Ok((0..m).map(|k| n / m + usize::from(k < n % m)).collect())
}

fn gain_mse(p: &Point, _: States) -> Result<Vec<f64>> {
    let (n, m, eta_d, g) = (p.get("n"), p.modes("m")?, p.get("eta_d"), p.get("g"));
    if !(eta_d > 0.0 && eta_d <= 1.0) {
        return Err(Error::OutOfRange { what: "eta_d in (0, 1]", value: eta_d });
    }
    let k_num = if eta_d == 1.0 { qfi_nds(n, m, g)?.1 } else { qfi_number_lossy(&spread(n, m)?, g, eta_d, LOSSY_CUTOFF)? };
    let k_coh = qfi_coherent_lossy(n, m, g, eta_d)?;
    Ok(vec![g, 1.0 / k_num, 1.0 / k_coh, mse_number(n, m, g, eta_d), mse_coherent(n, m, g, eta_d)])
}

fn gain_threshold(p: &Point, _: States) -> Result<Vec<f64>> {
    let eta_d = p.get("eta_d");
    Ok(vec![eta_d, threshold_gain(eta_d, p.get("n"), p.modes("m")?)?])
}

fn ecb(p: &Point, _: States) -> Result<Vec<f64>> {
    let (n, m, g, gp) = (p.get("n"), p.modes("m")?, p.get("g"), p.get("g_prime"));
    if n < 0.0 {
        return Err(Error::NegativeEnergy(n));
    }
    if !(g >= 1.0 && gp >= 1.0) {
        return Err(Error::OutOfRange { what: "G >= 1", value: g.min(gp) });
    }
    let (bq, _) = ecb_distance(n, m, g, gp);
    let (bc, _) = cecb_distance(n, m, g, gp);
    Ok(vec![g, gp, bq, bc, bc / bq])
}

fn spes(p: &Point, _: States) -> Result<Vec<f64>> {
    let n_s = p.get("n_s");
    let sc = NpsScenario::new(p.get("eta"), p.get("n_b"), n_s)?;
    Ok(vec![
        n_s,
        bhattacharyya_exponent_nps(NpsProbe::Spes, &sc)?,
        bhattacharyya_exponent_nps(NpsProbe::Tmsv, &sc)?,
        bhattacharyya_exponent_nps(NpsProbe::Coherent, &sc)?,
        match p.get_opt("kappa_mmpc") {
            Some(k) => mmpc_exponent(&sc, k)?,
            None => mmpc_optimal(&sc)?.1,
        },
        mmpdc_exponent(&sc, p.get("kappa_mmpdc"))?,
    ])
}

fn distinguish(_: &Point, states: States) -> Result<Vec<f64>> {
    let (a, b) = states.expect("states loaded for distinguish");
    let f = fidelity_gaussian(a, b)?;
    let c_half = bhattacharyya(a, b)?.value;
    let q = chernoff(a, b)?;
    let (lo, hi) = fvg_bounds(f.min(1.0))?;
    Ok(vec![f, c_half, q.value, q.s_star, lo, hi])
}
