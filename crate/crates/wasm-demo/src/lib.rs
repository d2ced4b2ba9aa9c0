//! Browser bindings for three small views of the simulator: the near-field
//! phase error of the plane-wave model, one AO run, and the coupling between
//! two dipoles versus spacing.
//!
//! Every export has a plain Rust twin returning [`holoxl::Result`], so the
//! logic is tested natively and the wasm layer only converts errors.

use holoxl::channel::{plane_response, spherical_response};
use holoxl::coupling::{coupling_matrix, CouplingConfig};
use holoxl::frontend::FeasibleSet;
use holoxl::geometry::{build_hma_array, wavelength, Point};
use holoxl::scenario::{Design, Scenario, ScenarioParams};
use holoxl::wmmse::SolverOptions;
use holoxl::Error;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct PhaseErrorMap {
    /// Range as a fraction of the Fraunhofer distance, log-spaced.
    pub ranges: Vec<f64>,
    pub angles_deg: Vec<f64>,
    /// Row per angle, column per range: worst element phase error in radians.
    pub error: Vec<Vec<f64>>,
    pub fraunhofer_m: f64,
}

pub fn phase_error_map(
    array_length: f64,
    carrier_ghz: f64,
    num_ranges: usize,
    num_angles: usize,
) -> holoxl::Result<PhaseErrorMap> {
    if num_ranges < 2 || num_angles < 2 {
        return Err(Error::InvalidParameter("need at least two ranges and two angles".into()));
    }
    let carrier = carrier_ghz * 1e9;
    let lambda = wavelength(carrier);
    let array = build_hma_array(array_length * lambda, lambda)?;
    let d_f = array.fraunhofer_distance();
    let ranges: Vec<f64> = (0..num_ranges)
        .map(|i| 0.05 * 200f64.powf(i as f64 / (num_ranges - 1) as f64))
        .collect();
    let angles_deg: Vec<f64> = (0..num_angles)
        .map(|i| -60.0 + 120.0 * i as f64 / (num_angles - 1) as f64)
        .collect();
    let mut error = Vec::with_capacity(num_angles);
    for &a in &angles_deg {
        let (s, c) = a.to_radians().sin_cos();
        let mut row = Vec::with_capacity(num_ranges);
        for &r in &ranges {
            let anchor = Point::new(r * d_f * s, 0.0, r * d_f * c);
            let sph = spherical_response(&anchor, &array.positions, carrier)?;
            let pw = plane_response(&anchor, &array.positions, carrier)?;
            row.push(sph.iter().zip(pw.iter()).map(|(x, y)| (x * y.conj()).arg().abs()).fold(0.0, f64::max));
        }
        error.push(row);
    }
    Ok(PhaseErrorMap {
        ranges,
        angles_deg,
        error,
        fraunhofer_m: d_f,
    })
}

#[derive(Debug, Serialize)]
pub struct AoSummary {
    pub set: String,
    pub rate_trace: Vec<f64>,
    pub rate: f64,
    pub narrowband_rate: f64,
    pub fully_digital_rate: f64,
    pub converged: bool,
    pub num_microstrips: usize,
    pub elements_per_strip: usize,
    /// Element positions in wavelengths, ordered like the weights.
    pub positions: Vec<[f64; 2]>,
    pub weight_abs: Vec<f64>,
    pub weight_arg: Vec<f64>,
}

pub fn ao_run(set: &str, array_length: f64, power_dbm: f64, bandwidth_mhz: f64, seed: u64) -> holoxl::Result<AoSummary> {
    let set: FeasibleSet = set.parse()?;
    if array_length > 3.0 {
        return Err(Error::InvalidParameter("the demo caps the array at 3 wavelengths".into()));
    }
    let params = ScenarioParams {
        array_length,
        power_dbm,
        bandwidth: bandwidth_mhz * 1e6,
        ..Default::default()
    };
    let sc = Scenario::build(&params, seed)?;
    let options = SolverOptions {
        seed,
        ao_max_iter: 30,
        mm_max_iter: 200,
        ..Default::default()
    };
    let proposed = sc.evaluate(set, Design::Proposed, &options)?;
    let narrow = sc.evaluate(set, Design::Narrowband, &options)?;
    let fd = sc.fully_digital(&sc.matched_upa()?)?;
    let lambda = sc.array.wavelength;
    let q = proposed.state.q.values();
    Ok(AoSummary {
        set: set.to_string(),
        rate_trace: proposed.state.rate_trace.clone(),
        rate: proposed.rate,
        narrowband_rate: narrow.rate,
        fully_digital_rate: fd,
        converged: proposed.state.converged,
        num_microstrips: sc.array.num_microstrips,
        elements_per_strip: sc.array.elements_per_strip,
        positions: sc.array.positions.iter().map(|p| [p.x / lambda, p.y / lambda]).collect(),
        weight_abs: q.iter().map(|v| v.norm()).collect(),
        weight_arg: q.iter().map(|v| v.arg()).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct CouplingCurve {
    pub spacing: Vec<f64>,
    /// `|C_12|` for λ/32 metamaterial elements.
    pub metamaterial: Vec<f64>,
    /// `|C_12|` for half-wave dipoles.
    pub half_wave: Vec<f64>,
}

pub fn coupling_curve(min_spacing: f64, max_spacing: f64, points: usize) -> holoxl::Result<CouplingCurve> {
    if !(min_spacing > 0.0 && max_spacing > min_spacing) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < min < max and two points (got {min_spacing}, {max_spacing}, {points})"
        )));
    }
    let lambda = 1.0;
    let spacing: Vec<f64> = (0..points)
        .map(|i| min_spacing + (max_spacing - min_spacing) * i as f64 / (points - 1) as f64)
        .collect();
    let entry = |d: f64, dipole: f64| -> holoxl::Result<f64> {
        let pair = vec![Point::origin(), Point::new(d * lambda, 0.0, 0.0)];
        Ok(coupling_matrix(&CouplingConfig::new(pair, lambda, dipole))?[(0, 1)].norm())
    };
    Ok(CouplingCurve {
        metamaterial: spacing.iter().map(|&d| entry(d, lambda / 32.0)).collect::<holoxl::Result<_>>()?,
        half_wave: spacing.iter().map(|&d| entry(d, lambda / 2.0)).collect::<holoxl::Result<_>>()?,
        spacing,
    })
}

fn to_js<T: Serialize>(r: holoxl::Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// JSON form of [`phase_error_map`].
#[wasm_bindgen(js_name = phaseErrorMap)]
pub fn phase_error_map_js(array_length: f64, carrier_ghz: f64, num_ranges: usize, num_angles: usize) -> Result<String, JsError> {
    to_js(phase_error_map(array_length, carrier_ghz, num_ranges, num_angles))
}

/// JSON form of [`ao_run`].
#[wasm_bindgen(js_name = aoRun)]
pub fn ao_run_js(set: &str, array_length: f64, power_dbm: f64, bandwidth_mhz: f64, seed: u32) -> Result<String, JsError> {
    to_js(ao_run(set, array_length, power_dbm, bandwidth_mhz, seed.into()))
}

/// JSON form of [`coupling_curve`].
#[wasm_bindgen(js_name = couplingCurve)]
pub fn coupling_curve_js(min_spacing: f64, max_spacing: f64, points: usize) -> Result<String, JsError> {
    to_js(coupling_curve(min_spacing, max_spacing, points))
}
