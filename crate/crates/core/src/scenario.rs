//! One simulated deployment: array, users, channels and link budget, plus the
//! designs evaluated on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    plane_wave_channel, spherical_channel, ChannelModel, ChannelParams, ChannelSet, PathFading, SubcarrierGrid,
    WaveguideModel,
};
use crate::coupling::{apply_coupling, coupling_matrix, CouplingConfig};
use crate::error::{Error, Result};
use crate::frontend::FeasibleSet;
use crate::geometry::{build_hma_array, sample_user_at, sample_user_layout, wavelength, ConventionalArray, HmaArray, Placement, Point, UserLayout};
use crate::linalg::CVector;
use crate::wmmse::{
    evaluate_design, fully_digital_rate, hybrid_ad_optimize, run_ao, Architecture, AoState, LinkBudget,
    SolverOptions,
};

/// Stream offset so fading draws never share a generator with the layout.
const FADING_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Physical parameters of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    /// Side length `A` of the array in carrier wavelengths.
    pub array_length: f64,
    /// Carrier frequency in Hz.
    pub carrier: f64,
    /// Total bandwidth `B` in Hz.
    pub bandwidth: f64,
    pub num_subcarriers: usize,
    pub num_users: usize,
    /// NLoS paths per user.
    pub paths_per_user: usize,
    /// Per-user transmit power in dBm. The default puts a `2λ` array in the
    /// same SNR regime as `-10 dBm` at `6λ`: users sit at distances that
    /// scale with `d_F ∝ A²`, so the path gain rises by `38 log10(9)` dB.
    pub power_dbm: f64,
    /// Noise power spectral density in dBm/Hz.
    pub noise_dbm_per_hz: f64,
    /// Arrival angle range on the `xz`-plane, in degrees.
    pub angle_range_deg: (f64, f64),
    /// Use the lossy microstrip response instead of `H_s = I`.
    pub lossy_waveguide: bool,
    /// Power gain of a metamaterial element relative to a conventional one.
    pub metamaterial_gain: f64,
    /// Put a single LoS point on the `z` axis at this fraction of `d_F`.
    pub user_distance: Option<f64>,
    /// Apply metamaterial mutual coupling to the HMA channel.
    pub coupling: bool,
    /// Apply log-normal shadowing.
    pub shadowing: bool,
    pub channel: ChannelParams,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            array_length: 2.0,
            carrier: 26e9,
            bandwidth: 600e6,
            num_subcarriers: 4,
            num_users: 2,
            paths_per_user: 5,
            power_dbm: -46.0,
            noise_dbm_per_hz: -174.0,
            angle_range_deg: (-45.0, 45.0),
            lossy_waveguide: false,
            metamaterial_gain: 0.4,
            user_distance: None,
            coupling: false,
            shadowing: true,
            channel: ChannelParams::default(),
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("array_length", self.array_length),
            ("carrier", self.carrier),
            ("bandwidth", self.bandwidth),
            ("metamaterial_gain", self.metamaterial_gain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {v})")));
            }
        }
        if self.num_subcarriers == 0 || self.num_users == 0 {
            return Err(Error::InvalidParameter("num_subcarriers and num_users must be at least 1".into()));
        }
        if !(self.power_dbm.is_finite() && self.noise_dbm_per_hz.is_finite()) {
            return Err(Error::InvalidParameter("power_dbm and noise_dbm_per_hz must be finite".into()));
        }
        if let Some(d) = self.user_distance {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!("user_distance must be positive (got {d})")));
            }
            if self.num_users != 1 {
                return Err(Error::InvalidParameter("user_distance needs num_users = 1".into()));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier)
    }

    fn angle_range(&self) -> (f64, f64) {
        (self.angle_range_deg.0.to_radians(), self.angle_range_deg.1.to_radians())
    }
}

fn hma_channels(
    params: &ScenarioParams,
    array: &HmaArray,
    layouts: &[UserLayout],
    grid: &SubcarrierGrid,
    fading: &PathFading,
    model: ChannelModel,
) -> Result<ChannelSet> {
    let channel = ChannelParams {
        element_gain: params.channel.element_gain * params.metamaterial_gain,
        ..params.channel.clone()
    };
    let set = match model {
        ChannelModel::Spherical => spherical_channel(layouts, &array.positions, grid, &channel, fading)?,
        ChannelModel::Plane => plane_wave_channel(layouts, &array.positions, grid, &channel, fading)?,
    };
    if params.coupling {
        let c = coupling_matrix(&CouplingConfig::metamaterial(array.positions.clone(), array.wavelength))?;
        apply_coupling(&c, &set)
    } else {
        Ok(set)
    }
}

/// How the weights are designed before being evaluated on the true channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Design {
    /// Spherical wideband channel (the proposed design).
    Proposed,
    /// Center-subcarrier channel on every subcarrier.
    Narrowband,
    /// Plane-wave channel.
    PlaneWave,
    /// Plane-wave channel at the center subcarrier only.
    PlaneNarrowband,
}

impl Design {
    pub fn tag(self) -> &'static str {
        match self {
            Design::Proposed => "proposed",
            Design::Narrowband => "narrowband",
            Design::PlaneWave => "plane",
            Design::PlaneNarrowband => "plane_narrowband",
        }
    }
}

/// Outcome of one design evaluated on the true channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    /// Rate on the true channel, aggregated over subcarriers (bits/s/Hz).
    pub rate: f64,
    /// Rate the design reached on its own design channel.
    pub design_rate: f64,
    pub state: AoState,
}

/// A realized scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub seed: u64,
    pub array: HmaArray,
    pub grid: SubcarrierGrid,
    pub layouts: Vec<UserLayout>,
    pub fading: PathFading,
    pub budget: LinkBudget,
    pub waveguide: Vec<CVector>,
    /// True spherical wideband channel of the HMA (coupled if requested).
    pub channels: ChannelSet,
}

impl Scenario {
    pub fn build(params: &ScenarioParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let lambda = params.wavelength();
        let array = build_hma_array(params.array_length * lambda, lambda)?;
        let grid = SubcarrierGrid::new(params.bandwidth, params.num_subcarriers, params.carrier)?;
        let layouts = match params.user_distance {
            None => sample_user_layout(seed, params.num_users, params.paths_per_user, &array, params.angle_range())?,
            Some(frac) => {
                let placement = Placement::near_field(&array, params.angle_range())?;
                let los = Point::new(0.0, 0.0, frac * array.fraunhofer_distance());
                vec![sample_user_at(seed, los, params.paths_per_user, &placement)?]
            }
        };
        let fading = if params.shadowing {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ FADING_STREAM);
            PathFading::draw(&layouts, &params.channel, &mut rng)
        } else {
            PathFading::mean(&layouts, &params.channel)
        };
        let budget = LinkBudget::from_dbm(params.power_dbm, params.noise_dbm_per_hz, &grid)?;
        let waveguide_model = if params.lossy_waveguide {
            WaveguideModel::lossy(array.num_microstrips, array.elements_per_strip, lambda)
        } else {
            WaveguideModel::identity(grid.count)
        };
        let waveguide = waveguide_model.diagonals(&grid, array.num_elements())?;
        let channels = hma_channels(params, &array, &layouts, &grid, &fading, ChannelModel::Spherical)?;
        Ok(Self {
            params: params.clone(),
            seed,
            array,
            grid,
            layouts,
            fading,
            budget,
            waveguide,
            channels,
        })
    }

    /// HMA channel under `model`, coupled if the scenario asks for it.
    pub fn hma_channels(&self, model: ChannelModel) -> Result<ChannelSet> {
        hma_channels(&self.params, &self.array, &self.layouts, &self.grid, &self.fading, model)
    }

    /// HMA channel with coupling forced on or off.
    pub fn hma_channels_with_coupling(&self, coupled: bool) -> Result<ChannelSet> {
        let mut other = self.clone();
        other.params.coupling = coupled;
        other.hma_channels(ChannelModel::Spherical)
    }

    /// Channel the given design is optimized on.
    pub fn design_channels(&self, design: Design) -> Result<ChannelSet> {
        let center = self.grid.center_index();
        Ok(match design {
            Design::Proposed => self.channels.clone(),
            Design::Narrowband => self.channels.replicate_subcarrier(center),
            Design::PlaneWave => self.hma_channels(ChannelModel::Plane)?,
            Design::PlaneNarrowband => self.hma_channels(ChannelModel::Plane)?.replicate_subcarrier(center),
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::Metasurface {
            elements_per_strip: self.array.elements_per_strip,
            waveguide: self.waveguide.clone(),
        }
    }

    /// Runs AO for `set` on the `design` channel and scores it on the true one.
    pub fn evaluate(&self, set: FeasibleSet, design: Design, options: &SolverOptions) -> Result<DesignOutcome> {
        let design_channels = self.design_channels(design)?;
        let state = run_ao(
            &design_channels.matrices,
            self.array.elements_per_strip,
            &self.waveguide,
            set,
            &self.budget,
            options,
        )?;
        let rate = if design == Design::Proposed {
            state.final_rate()
        } else {
            evaluate_design(
                &self.architecture(),
                state.q.values(),
                &state.combiners,
                &self.channels.matrices,
                &self.budget,
            )?
        };
        Ok(DesignOutcome {
            rate,
            design_rate: state.final_rate(),
            state,
        })
    }

    /// Channel of a conventional array seeing the same users and paths.
    pub fn conventional_channels(&self, array: &ConventionalArray, coupling_dipole: Option<f64>) -> Result<ChannelSet> {
        let set = spherical_channel(&self.layouts, &array.positions, &self.grid, &self.params.channel, &self.fading)?;
        match coupling_dipole {
            None => Ok(set),
            Some(length) => {
                let cfg = CouplingConfig::new(array.positions.clone(), self.array.wavelength, length);
                apply_coupling(&coupling_matrix(&cfg)?, &set)
            }
        }
    }

    /// Square UPA at half-wavelength spacing over the same footprint.
    pub fn matched_upa(&self) -> Result<ConventionalArray> {
        ConventionalArray::upa_matching(self.array.array_length, self.array.wavelength / 2.0)
    }

    /// ULA with one antenna per microstrip, at half-wavelength spacing.
    pub fn matched_ula(&self) -> Result<ConventionalArray> {
        ConventionalArray::ula(self.array.num_microstrips, self.array.wavelength / 2.0)
    }

    /// Fully-digital rate of a conventional array.
    pub fn fully_digital(&self, array: &ConventionalArray) -> Result<f64> {
        fully_digital_rate(&self.conventional_channels(array, None)?.matrices, &self.budget)
    }

    /// Hybrid A/D rate on a conventional array with `num_rf` RF chains.
    pub fn hybrid(&self, array: &ConventionalArray, num_rf: usize, options: &SolverOptions) -> Result<f64> {
        let channels = self.conventional_channels(array, None)?;
        Ok(hybrid_ad_optimize(&channels.matrices, num_rf, &self.budget, options, false)?.rate)
    }
}
