//! Plane-wave transmission sequences: steering angle sets, per-emitter
//! firing delays, block delay averaging, and the excitation pulse.

use serde::{Deserialize, Serialize};

use crate::array::{direction_cosines, CoupledArray, MediumSpec, VirtualAperture};
use crate::error::{Error, Result};

/// One steered plane-wave direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveAngle {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl PlaneWaveAngle {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if azimuth_deg.abs() >= 90.0 || elevation_deg.abs() >= 90.0 {
            return Err(Error::Config(format!(
                "plane-wave angles must satisfy |az|, |el| < 90 deg, got ({azimuth_deg}, {elevation_deg})"
            )));
        }
        Ok(Self {
            azimuth_deg,
            elevation_deg,
        })
    }

    /// Unit propagation direction (x, y, z).
    pub fn direction(&self) -> [f64; 3] {
        let (dx, dy, dz) =
            direction_cosines(self.azimuth_deg.to_radians(), self.elevation_deg.to_radians());
        [dx, dy, dz]
    }
}

/// The star of 13 angles: broadside, two magnitudes along each semi-axis,
/// and four diagonals using the largest axis step whose diagonal magnitude
/// stays within `diag_max_deg`.
///
/// Fewer diagonal angles are used because square elements are wider along
/// their diagonals, which narrows directivity and limits diagonal steering.
pub fn star_pattern(
    axis_max_deg: f64,
    axis_count: usize,
    diag_max_deg: f64,
) -> Result<Vec<PlaneWaveAngle>> {
    if axis_count != 2 {
        return Err(Error::Config(format!(
            "star pattern needs exactly 2 magnitudes per semi-axis to form 13 angles, got {axis_count}"
        )));
    }
    if !(axis_max_deg > 0.0) {
        return Err(Error::Config(
            "star pattern with zero axis extent would duplicate broadside 13 times".into(),
        ));
    }
    let steps: Vec<f64> = (1..=axis_count)
        .map(|i| axis_max_deg * i as f64 / axis_count as f64)
        .collect();
    let diag = steps
        .iter()
        .rev()
        .find(|&&s| s * std::f64::consts::SQRT_2 <= diag_max_deg + 1e-12)
        .copied()
        .ok_or_else(|| {
            Error::Config(format!(
                "no axis step fits the diagonal limit of {diag_max_deg} deg"
            ))
        })?;
    let mut angles = vec![PlaneWaveAngle::new(0.0, 0.0)?];
    for &s in &steps {
        angles.push(PlaneWaveAngle::new(s, 0.0)?);
        angles.push(PlaneWaveAngle::new(-s, 0.0)?);
    }
    for &s in &steps {
        angles.push(PlaneWaveAngle::new(0.0, s)?);
        angles.push(PlaneWaveAngle::new(0.0, -s)?);
    }
    for sa in [1.0, -1.0] {
        for se in [1.0, -1.0] {
            angles.push(PlaneWaveAngle::new(sa * diag, se * diag)?);
        }
    }
    debug_assert_eq!(angles.len(), 13);
    Ok(angles)
}

/// Raw plane-wave firing delay of an emitter at `position`, before offset removal.
#[inline]
pub fn raw_plane_wave_delay(position: [f64; 3], angle: &PlaneWaveAngle, medium: &MediumSpec) -> f64 {
    let d = angle.direction();
    (position[0] * d[0] + position[1] * d[1]) / medium.sound_speed
}

/// Per-emitter firing delays for one steered plane wave, shifted so the
/// earliest emitter fires at zero. Returns the delays and the applied
/// offset, i.e. `delay = raw + offset`.
pub fn plane_wave_delays(
    positions: &[[f64; 3]],
    angle: &PlaneWaveAngle,
    medium: &MediumSpec,
) -> (Vec<f64>, f64) {
    let raw: Vec<f64> = positions
        .iter()
        .map(|&p| raw_plane_wave_delay(p, angle, medium))
        .collect();
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let offset = if min.is_finite() { -min } else { 0.0 };
    (raw.iter().map(|r| r + offset).collect(), offset)
}

/// Firing delay of a coupled block: the arithmetic mean of its member delays.
pub fn coupled_delay(member_delays: &[f64]) -> Result<f64> {
    if member_delays.is_empty() {
        return Err(Error::Config("coupled block has no members".into()));
    }
    Ok(member_delays.iter().sum::<f64>() / member_delays.len() as f64)
}

/// Envelope of the excitation pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseEnvelope {
    Gaussian,
    Hann,
}

/// Windowed sinusoid excitation. The nominal duration is `cycles` periods
/// of the carrier; the Gaussian envelope puts +/- 2 sigma at that duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub cycles: f64,
    pub envelope: PulseEnvelope,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            cycles: 3.0,
            envelope: PulseEnvelope::Gaussian,
        }
    }
}

impl PulseSpec {
    /// Gaussian envelope standard deviation in seconds.
    pub fn sigma(&self, center_frequency: f64) -> f64 {
        self.cycles / (4.0 * center_frequency)
    }

    /// Time beyond which the pulse is treated as identically zero.
    pub fn half_support(&self, center_frequency: f64) -> f64 {
        match self.envelope {
            PulseEnvelope::Gaussian => 5.0 * self.sigma(center_frequency),
            PulseEnvelope::Hann => self.cycles / (2.0 * center_frequency),
        }
    }

    /// Pulse amplitude at time `t` relative to the pulse center.
    #[inline]
    pub fn sample(&self, t: f64, center_frequency: f64) -> f64 {
        let carrier = (2.0 * std::f64::consts::PI * center_frequency * t).cos();
        match self.envelope {
            PulseEnvelope::Gaussian => {
                let s = self.sigma(center_frequency);
                if t.abs() > 5.0 * s {
                    0.0
                } else {
                    (-0.5 * (t / s) * (t / s)).exp() * carrier
                }
            }
            PulseEnvelope::Hann => {
                let half = self.cycles / (2.0 * center_frequency);
                if t.abs() > half {
                    0.0
                } else {
                    let w = 0.5 * (1.0 + (std::f64::consts::PI * t / half).cos());
                    w * carrier
                }
            }
        }
    }
}

/// A complete plane-wave transmission sequence: the angle set, the carrier,
/// the per-transmission per-emitter delay table (offset-removed), and the
/// offsets that were removed, needed to reconstruct absolute wavefront timing.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSequence {
    pub angles: Vec<PlaneWaveAngle>,
    pub center_frequency: f64,
    /// `delays[k][i]` is the firing delay of emitter `i` for transmission `k`.
    pub delays: Vec<Vec<f64>>,
    /// `offsets[k]` satisfies `delays[k][i] = raw[k][i] + offsets[k]`.
    pub offsets: Vec<f64>,
    pub pulse: PulseSpec,
}

impl TransmitSequence {
    pub fn n_transmissions(&self) -> usize {
        self.angles.len()
    }

    /// Sequence whose emitters are the blocks of a coupled array. Delays are
    /// computed per member element, averaged within each block, then shifted
    /// so each transmission's earliest block fires at zero.
    pub fn for_coupled_array(
        coupled: &CoupledArray,
        angles: Vec<PlaneWaveAngle>,
        center_frequency: f64,
        medium: &MediumSpec,
        pulse: PulseSpec,
    ) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Config("transmit sequence needs at least one angle".into()));
        }
        let mut delays = Vec::with_capacity(angles.len());
        let mut offsets = Vec::with_capacity(angles.len());
        for angle in &angles {
            let per_block: Result<Vec<f64>> = coupled
                .blocks
                .iter()
                .map(|b| {
                    let member_delays: Vec<f64> = b
                        .members
                        .iter()
                        .map(|&m| raw_plane_wave_delay(coupled.base.positions[m], angle, medium))
                        .collect();
                    coupled_delay(&member_delays)
                })
                .collect();
            let per_block = per_block?;
            let min = per_block.iter().cloned().fold(f64::INFINITY, f64::min);
            offsets.push(-min);
            delays.push(per_block.iter().map(|d| d - min).collect());
        }
        Ok(Self {
            angles,
            center_frequency,
            delays,
            offsets,
            pulse,
        })
    }

    /// Sequence whose emitters are all blocks of the virtual aperture, in
    /// global row-major order. The offset is removed over the whole virtual
    /// aperture so every quadrant fires its section of one shared profile.
    pub fn for_virtual_aperture(
        vla: &VirtualAperture,
        angles: Vec<PlaneWaveAngle>,
        center_frequency: f64,
        medium: &MediumSpec,
        pulse: PulseSpec,
    ) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Config("transmit sequence needs at least one angle".into()));
        }
        let mut delays = Vec::with_capacity(angles.len());
        let mut offsets = Vec::with_capacity(angles.len());
        for angle in &angles {
            // Block delay equals the delay of the block centroid because the
            // plane-wave delay is linear in position.
            let (d, offset) = plane_wave_delays(&vla.positions, angle, medium);
            delays.push(d);
            offsets.push(offset);
        }
        Ok(Self {
            angles,
            center_frequency,
            delays,
            offsets,
            pulse,
        })
    }

    /// Write the angle set as CSV: `angle_index,azimuth_deg,elevation_deg`.
    pub fn angles_csv(&self) -> String {
        let mut out = String::from("angle_index,azimuth_deg,elevation_deg\n");
        for (i, a) in self.angles.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i, a.azimuth_deg, a.elevation_deg));
        }
        out
    }

    /// Write one transmission's delays as CSV: `emitter_index,delay_s`.
    pub fn delays_csv(&self, transmission: usize) -> Result<String> {
        let row = self
            .delays
            .get(transmission)
            .ok_or_else(|| Error::Data(format!("no transmission {transmission}")))?;
        let mut out = String::from("emitter_index,delay_s\n");
        for (i, d) in row.iter().enumerate() {
            out.push_str(&format!("{},{:e}\n", i, d));
        }
        Ok(out)
    }
}
