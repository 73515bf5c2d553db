//! Matrix array geometry: element grids, electronic element coupling,
//! directivity, minimum F-number, and the 2x2 virtual large aperture tiling.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation medium. Only the sound speed matters for plane-wave geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// Speed of sound in m/s.
    pub sound_speed: f64,
}

impl MediumSpec {
    pub fn new(sound_speed: f64) -> Result<Self> {
        if !(sound_speed > 0.0) {
            return Err(Error::Config(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        Ok(Self { sound_speed })
    }

    /// Wavelength at the given center frequency.
    pub fn wavelength(&self, center_frequency: f64) -> f64 {
        self.sound_speed / center_frequency
    }
}

/// Physical size of one rectangular element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    /// Lateral (x) extent in meters.
    pub width: f64,
    /// Elevational (y) extent in meters.
    pub height: f64,
}

impl ElementSpec {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0) || !(height > 0.0) {
            return Err(Error::Config(format!(
                "element dimensions must be positive, got {width} x {height}"
            )));
        }
        Ok(Self { width, height })
    }

    /// Far-field amplitude directivity of a solid rectangular element,
    /// normalized to 1 at broadside.
    ///
    /// The aperture is separable, so the 2D spatial Fourier transform
    /// factors into two 1D sinc terms evaluated at the direction cosines
    /// of the (azimuth, elevation) steering convention used throughout.
    pub fn directivity(&self, wavelength: f64, azimuth_rad: f64, elevation_rad: f64) -> f64 {
        let (dx, dy, _) = direction_cosines(azimuth_rad, elevation_rad);
        sinc(std::f64::consts::PI * self.width * dx / wavelength)
            * sinc(std::f64::consts::PI * self.height * dy / wavelength)
    }
}

/// sin(x)/x with the removable singularity filled in.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Unit propagation direction for a steered plane wave.
/// Azimuth rotates in the x-z plane, elevation tilts toward y.
#[inline]
pub fn direction_cosines(azimuth_rad: f64, elevation_rad: f64) -> (f64, f64, f64) {
    let (sa, ca) = azimuth_rad.sin_cos();
    let (se, ce) = elevation_rad.sin_cos();
    (sa * ce, se, ca * ce)
}

/// Fully addressed 2D matrix array on a regular grid, centered on its
/// centroid in the z=0 plane. Elements are stored row-major: index
/// `row * cols + col`, x varies with column, y with row.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub pitch_x: f64,
    pub pitch_y: f64,
    pub element: ElementSpec,
    /// Contiguous row ranges partitioning `[0, rows)`.
    pub panels: Vec<Range<usize>>,
    /// Element center positions in meters, row-major.
    pub positions: Vec<[f64; 3]>,
}

impl MatrixArrayGeometry {
    pub fn n_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// x coordinate of a column of elements.
    pub fn x_of_col(&self, col: usize) -> f64 {
        (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.pitch_x
    }

    /// y coordinate of a row of elements.
    pub fn y_of_row(&self, row: usize) -> f64 {
        (row as f64 - (self.rows as f64 - 1.0) / 2.0) * self.pitch_y
    }
}

/// Build a centered matrix array with equal contiguous panel row bands.
pub fn build_matrix_array(
    rows: usize,
    cols: usize,
    pitch_x: f64,
    pitch_y: f64,
    element: ElementSpec,
    panel_count: usize,
) -> Result<MatrixArrayGeometry> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config("array must have nonzero rows and cols".into()));
    }
    if !(pitch_x > 0.0) || !(pitch_y > 0.0) {
        return Err(Error::Config(format!(
            "pitches must be positive, got {pitch_x} x {pitch_y}"
        )));
    }
    if element.width > pitch_x || element.height > pitch_y {
        return Err(Error::Config(format!(
            "element ({} x {}) larger than pitch ({} x {})",
            element.width, element.height, pitch_x, pitch_y
        )));
    }
    if panel_count == 0 || rows % panel_count != 0 {
        return Err(Error::Config(format!(
            "panel count {panel_count} does not evenly divide {rows} rows"
        )));
    }
    let band = rows / panel_count;
    let panels = (0..panel_count).map(|p| p * band..(p + 1) * band).collect();
    let mut positions = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        let y = (row as f64 - (rows as f64 - 1.0) / 2.0) * pitch_y;
        for col in 0..cols {
            let x = (col as f64 - (cols as f64 - 1.0) / 2.0) * pitch_x;
            positions.push([x, y, 0.0]);
        }
    }
    Ok(MatrixArrayGeometry {
        rows,
        cols,
        pitch_x,
        pitch_y,
        element,
        panels,
        positions,
    })
}

/// One block of electronically coupled elements acting as a single large element.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBlock {
    /// Flat indices of member elements in the base geometry.
    pub members: Vec<usize>,
    /// Geometric centroid of the member positions.
    pub centroid: [f64; 3],
    /// Outer-edge-to-outer-edge lateral span, kerf included.
    pub width: f64,
    /// Outer-edge-to-outer-edge elevational span, kerf included.
    pub height: f64,
}

/// A matrix array with factor x factor blocks of adjacent elements wired together.
/// Blocks are stored row-major over the block grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledArray {
    pub base: MatrixArrayGeometry,
    pub factor: usize,
    pub blocks: Vec<CoupledBlock>,
}

impl CoupledArray {
    pub fn block_rows(&self) -> usize {
        self.base.rows / self.factor
    }

    pub fn block_cols(&self) -> usize {
        self.base.cols / self.factor
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_positions(&self) -> Vec<[f64; 3]> {
        self.blocks.iter().map(|b| b.centroid).collect()
    }

    /// Effective directivity of one coupled block: the product of the
    /// member-grid array factor and the member element directivity, each
    /// separable in x and y and normalized to 1 at broadside. The kerf
    /// gaps enter through the member pitch exceeding the element size.
    pub fn block_directivity(&self, wavelength: f64, azimuth_rad: f64, elevation_rad: f64) -> f64 {
        let (dx, dy, _) = direction_cosines(azimuth_rad, elevation_rad);
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let af_x = array_factor_1d(self.factor, self.base.pitch_x, k * dx);
        let af_y = array_factor_1d(self.factor, self.base.pitch_y, k * dy);
        let elem = &self.base.element;
        af_x * af_y
            * sinc(std::f64::consts::PI * elem.width * dx / wavelength)
            * sinc(std::f64::consts::PI * elem.height * dy / wavelength)
    }
}

/// Normalized array factor of `n` equispaced in-phase point sources.
fn array_factor_1d(n: usize, pitch: f64, k_dir: f64) -> f64 {
    let mut sum = 0.0;
    for m in 0..n {
        let offset = (m as f64 - (n as f64 - 1.0) / 2.0) * pitch;
        sum += (k_dir * offset).cos();
    }
    sum / n as f64
}

/// Group adjacent elements into factor x factor blocks.
///
/// Coupling factors are limited to 1, 2, and 4, and a block may never span
/// a panel boundary, so the factor must also divide each panel's row span.
pub fn couple(geometry: &MatrixArrayGeometry, factor: usize) -> Result<CoupledArray> {
    if !matches!(factor, 1 | 2 | 4) {
        return Err(Error::Config(format!(
            "coupling factor must be 1, 2, or 4, got {factor}"
        )));
    }
    if geometry.rows % factor != 0 || geometry.cols % factor != 0 {
        return Err(Error::Config(format!(
            "coupling factor {factor} does not divide {} x {} grid",
            geometry.rows, geometry.cols
        )));
    }
    for panel in &geometry.panels {
        if panel.len() % factor != 0 || panel.start % factor != 0 {
            return Err(Error::Config(format!(
                "coupling factor {factor} would cross the panel boundary at row {}",
                panel.start
            )));
        }
    }
    let block_rows = geometry.rows / factor;
    let block_cols = geometry.cols / factor;
    let mut blocks = Vec::with_capacity(block_rows * block_cols);
    for br in 0..block_rows {
        for bc in 0..block_cols {
            let mut members = Vec::with_capacity(factor * factor);
            let mut centroid = [0.0f64; 3];
            for dr in 0..factor {
                for dc in 0..factor {
                    let idx = (br * factor + dr) * geometry.cols + (bc * factor + dc);
                    let p = geometry.positions[idx];
                    centroid[0] += p[0];
                    centroid[1] += p[1];
                    centroid[2] += p[2];
                    members.push(idx);
                }
            }
            let n = members.len() as f64;
            centroid = [centroid[0] / n, centroid[1] / n, centroid[2] / n];
            blocks.push(CoupledBlock {
                members,
                centroid,
                width: (factor as f64 - 1.0) * geometry.pitch_x + geometry.element.width,
                height: (factor as f64 - 1.0) * geometry.pitch_y + geometry.element.height,
            });
        }
    }
    Ok(CoupledArray {
        base: geometry.clone(),
        factor,
        blocks,
    })
}

/// Minimum constant F-number supported by an element of the given width.
///
/// The half-power angle alpha of the 1D sinc directivity satisfies
/// sin(u)/u = 1/sqrt(2) at u = pi * w * sin(alpha), and F# = 1/(2 sin(alpha)),
/// which reduces to a linear function of the width in wavelengths.
pub fn min_f_number(width_in_wavelengths: f64) -> Result<f64> {
    if !(width_in_wavelengths > 0.0) {
        return Err(Error::Config(format!(
            "element width must be positive, got {width_in_wavelengths}"
        )));
    }
    let u = half_power_sinc_arg();
    let sin_alpha = u / (std::f64::consts::PI * width_in_wavelengths);
    Ok(1.0 / (2.0 * sin_alpha))
}

/// Positive root of sin(u)/u = 1/sqrt(2), found by bisection on (0, pi).
pub fn half_power_sinc_arg() -> f64 {
    let target = std::f64::consts::FRAC_1_SQRT_2;
    let (mut lo, mut hi) = (1e-9, std::f64::consts::PI - 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sinc(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Four translated copies of a coupled array tiling a 2x2 footprint.
/// Quadrants are ordered row-major over the tiling: (-x,-y), (+x,-y),
/// (-x,+y), (+x,+y).
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualAperture {
    /// Translation offset and the coupled array placed there.
    pub quadrants: Vec<([f64; 3], CoupledArray)>,
    /// Union of translated block centroids, global row-major order over
    /// the combined (2*block_rows) x (2*block_cols) grid.
    pub positions: Vec<[f64; 3]>,
}

impl VirtualAperture {
    pub fn n_positions(&self) -> usize {
        self.positions.len()
    }

    pub fn block_rows(&self) -> usize {
        2 * self.quadrants[0].1.block_rows()
    }

    pub fn block_cols(&self) -> usize {
        2 * self.quadrants[0].1.block_cols()
    }

    /// Global row-major position of the block at (row, col) of the combined grid.
    pub fn position(&self, row: usize, col: usize) -> [f64; 3] {
        self.positions[row * self.block_cols() + col]
    }
}

/// Tile four placements of the coupled array into a virtual aperture that
/// spans twice the base footprint in each direction, with no overlap, no
/// gap, and the element pitch preserved across quadrant seams.
pub fn tile_virtual_aperture(coupled: &CoupledArray) -> VirtualAperture {
    let span_x = coupled.base.cols as f64 * coupled.base.pitch_x;
    let span_y = coupled.base.rows as f64 * coupled.base.pitch_y;
    let mut quadrants = Vec::with_capacity(4);
    for qr in 0..2usize {
        for qc in 0..2usize {
            let offset = [
                (qc as f64 - 0.5) * span_x,
                (qr as f64 - 0.5) * span_y,
                0.0,
            ];
            quadrants.push((offset, coupled.clone()));
        }
    }
    let (brows, bcols) = (coupled.block_rows(), coupled.block_cols());
    let mut positions = Vec::with_capacity(4 * coupled.n_blocks());
    for row in 0..2 * brows {
        let (qr, lr) = (row / brows, row % brows);
        for col in 0..2 * bcols {
            let (qc, lc) = (col / bcols, col % bcols);
            let (offset, quad) = &quadrants[qr * 2 + qc];
            let c = quad.blocks[lr * bcols + lc].centroid;
            positions.push([c[0] + offset[0], c[1] + offset[1], c[2] + offset[2]]);
        }
    }
    VirtualAperture {
        quadrants,
        positions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn vermon_like() -> MatrixArrayGeometry {
        // 32x32, four 8-row panels, pitch/element chosen so the coupled
        // widths land on 1.48 / 3.10 / 6.32 wavelengths at 8 MHz in water.
        let lambda = 1540.0 / 8.0e6;
        build_matrix_array(
            32,
            32,
            1.62 * lambda,
            1.62 * lambda,
            ElementSpec::new(1.48 * lambda, 1.48 * lambda).unwrap(),
            4,
        )
        .unwrap()
    }

    #[test]
    fn eight_by_eight_span() {
        let g = build_matrix_array(
            8,
            8,
            1.25e-3,
            1.25e-3,
            ElementSpec::new(1.20e-3, 1.20e-3).unwrap(),
            1,
        )
        .unwrap();
        assert_eq!(g.positions.len(), 64);
        let xs: Vec<f64> = g.positions.iter().map(|p| p[0]).collect();
        let span = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert_relative_eq!(span, 8.75e-3, max_relative = 1e-12);
        let ys: Vec<f64> = g.positions.iter().map(|p| p[1]).collect();
        let span_y = ys.iter().cloned().fold(f64::MIN, f64::max)
            - ys.iter().cloned().fold(f64::MAX, f64::min);
        assert_relative_eq!(span_y, 8.75e-3, max_relative = 1e-12);
        // centered on the centroid
        let cx: f64 = xs.iter().sum::<f64>() / 64.0;
        assert!(cx.abs() < 1e-15);
    }

    #[test]
    fn single_element_at_origin() {
        let g = build_matrix_array(1, 1, 1e-3, 1e-3, ElementSpec::new(9e-4, 9e-4).unwrap(), 1)
            .unwrap();
        assert_eq!(g.positions, vec![[0.0, 0.0, 0.0]]);
    }

    #[test]
    fn panel_bands() {
        let g = vermon_like();
        assert_eq!(g.panels.len(), 4);
        assert_eq!(g.panels[0], 0..8);
        assert_eq!(g.panels[3], 24..32);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let e = ElementSpec::new(1.0e-3, 1.0e-3).unwrap();
        assert!(build_matrix_array(8, 8, 1.25e-3, 1.25e-3, e, 3).is_err());
        assert!(build_matrix_array(8, 8, 0.9e-3, 1.25e-3, e, 1).is_err());
        assert!(build_matrix_array(0, 8, 1.25e-3, 1.25e-3, e, 1).is_err());
    }

    #[test]
    fn couple_block_counts() {
        let g = vermon_like();
        assert_eq!(couple(&g, 1).unwrap().n_blocks(), 1024);
        assert_eq!(couple(&g, 2).unwrap().n_blocks(), 1024 / 4);
        let c4 = couple(&g, 4).unwrap();
        assert_eq!(c4.n_blocks(), 64);
        assert!(c4.blocks.iter().all(|b| b.members.len() == 16));
    }

    #[test]
    fn couple_factor_one_is_identity() {
        let g = vermon_like();
        let c = couple(&g, 1).unwrap();
        assert_eq!(c.n_blocks(), g.n_elements());
        for (b, p) in c.blocks.iter().zip(&g.positions) {
            assert_eq!(b.centroid, *p);
            assert_relative_eq!(b.width, g.element.width);
        }
    }

    #[test]
    fn couple_rejects_bad_factors_and_panel_crossings() {
        let g = vermon_like();
        assert!(couple(&g, 3).is_err());
        assert!(couple(&g, 8).is_err());
        // 4 panels of 2 rows each: factor 4 would cross a panel boundary.
        let g2 = build_matrix_array(
            8,
            8,
            1e-3,
            1e-3,
            ElementSpec::new(0.9e-3, 0.9e-3).unwrap(),
            4,
        )
        .unwrap();
        assert!(couple(&g2, 4).is_err());
        assert!(couple(&g2, 2).is_ok());
    }

    #[test]
    fn member_count_conservation() {
        let g = vermon_like();
        for factor in [1, 2, 4] {
            let c = couple(&g, factor).unwrap();
            let total: usize = c.blocks.iter().map(|b| b.members.len()).sum();
            assert_eq!(total, g.n_elements());
            // every element in exactly one block
            let mut seen = vec![false; g.n_elements()];
            for b in &c.blocks {
                for &m in &b.members {
                    assert!(!seen[m]);
                    seen[m] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn directivity_broadside_is_one() {
        let e = ElementSpec::new(1.2e-3, 1.2e-3).unwrap();
        assert_relative_eq!(e.directivity(1.97e-4, 0.0, 0.0), 1.0);
        let g = vermon_like();
        let c = couple(&g, 2).unwrap();
        assert_relative_eq!(c.block_directivity(1.925e-4, 0.0, 0.0), 1.0);
    }

    #[test]
    fn directivity_first_null() {
        // 6.5-wavelength element: first azimuthal null at sin(theta) = 1/6.5.
        let lambda = 1.97e-4;
        let e = ElementSpec::new(6.5 * lambda, 6.5 * lambda).unwrap();
        let theta = (1.0f64 / 6.5).asin();
        assert_relative_eq!(theta.to_degrees(), 8.85, max_relative = 1e-3);
        assert!(e.directivity(lambda, theta, 0.0).abs() < 1e-12);
        // bracketing the null the amplitude changes sign
        assert!(e.directivity(lambda, theta - 1e-3, 0.0) > 0.0);
        assert!(e.directivity(lambda, theta + 1e-3, 0.0) < 0.0);
    }

    #[test]
    fn directivity_symmetry() {
        let lambda = 1.925e-4;
        let e = ElementSpec::new(1.48 * lambda, 1.48 * lambda).unwrap();
        for a in [0.05f64, 0.2, 0.6] {
            assert_relative_eq!(
                e.directivity(lambda, a, 0.1),
                e.directivity(lambda, -a, 0.1),
                max_relative = 1e-12
            );
            assert_relative_eq!(
                e.directivity(lambda, 0.1, a),
                e.directivity(lambda, 0.1, -a),
                max_relative = 1e-12
            );
        }
    }

    /// -3 dB angle of a 1D amplitude profile by bisection, in radians.
    fn half_power_angle(f: impl Fn(f64) -> f64) -> f64 {
        let target = std::f64::consts::FRAC_1_SQRT_2;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut a = 0.0;
        loop {
            a += 1e-4;
            if f(a).abs() < target {
                lo = a - 1e-4;
                hi = a;
                break;
            }
            assert!(a < 1.5, "no half-power angle found");
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid).abs() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn coupled_block_approximates_solid_element() {
        // 2x2 coupled block vs a solid element of identical outer span:
        // same broadside value, -3 dB angles within 5%.
        let lambda = 1540.0 / 8.0e6;
        let g = build_matrix_array(
            2,
            2,
            1.62 * lambda,
            1.62 * lambda,
            ElementSpec::new(1.48 * lambda, 1.48 * lambda).unwrap(),
            1,
        )
        .unwrap();
        let c = couple(&g, 2).unwrap();
        let solid = ElementSpec::new(c.blocks[0].width, c.blocks[0].height).unwrap();
        assert_relative_eq!(c.block_directivity(lambda, 0.0, 0.0), 1.0);
        assert_relative_eq!(solid.directivity(lambda, 0.0, 0.0), 1.0);
        let a_coupled = half_power_angle(|a| c.block_directivity(lambda, a, 0.0));
        let a_solid = half_power_angle(|a| solid.directivity(lambda, a, 0.0));
        assert!(
            (a_coupled - a_solid).abs() / a_solid < 0.05,
            "coupled {a_coupled} vs solid {a_solid}"
        );
    }

    #[test]
    fn min_f_number_matches_coupled_widths() {
        assert_relative_eq!(min_f_number(1.48).unwrap(), 1.70, max_relative = 0.05);
        assert_relative_eq!(min_f_number(3.10).unwrap(), 3.51, max_relative = 0.05);
        assert_relative_eq!(min_f_number(6.32).unwrap(), 7.16, max_relative = 0.05);
        assert!(min_f_number(0.0).is_err());
        assert!(min_f_number(-1.0).is_err());
    }

    #[test]
    fn min_f_number_monotone() {
        let mut prev = 0.0;
        for i in 1..200 {
            let w = i as f64 * 0.05;
            let f = min_f_number(w).unwrap();
            assert!(f > prev);
            prev = f;
        }
    }

    #[test]
    fn half_power_arg_solves_equation() {
        let u = half_power_sinc_arg();
        assert_relative_eq!(sinc(u), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn virtual_aperture_counts() {
        let g = vermon_like();
        for (factor, expected) in [(1usize, 4096usize), (2, 1024), (4, 256)] {
            let vla = tile_virtual_aperture(&couple(&g, factor).unwrap());
            assert_eq!(vla.n_positions(), expected);
        }
    }

    #[test]
    fn virtual_aperture_pitch_preserved_no_duplicates() {
        let g = vermon_like();
        let c = couple(&g, 2).unwrap();
        let vla = tile_virtual_aperture(&c);
        let cols = vla.block_cols();
        let rows = vla.block_rows();
        let pitch = 2.0 * g.pitch_x; // block pitch at factor 2
        for r in 0..rows {
            for k in 1..cols {
                let dx = vla.position(r, k)[0] - vla.position(r, k - 1)[0];
                assert_relative_eq!(dx, pitch, max_relative = 1e-9);
            }
        }
        for cidx in 0..cols {
            for k in 1..rows {
                let dy = vla.position(k, cidx)[1] - vla.position(k - 1, cidx)[1];
                assert_relative_eq!(dy, 2.0 * g.pitch_y, max_relative = 1e-9);
            }
        }
        // no duplicate positions
        let mut seen = std::collections::HashSet::new();
        for p in &vla.positions {
            let key = (
                (p[0] * 1e9).round() as i64,
                (p[1] * 1e9).round() as i64,
            );
            assert!(seen.insert(key), "duplicate position {p:?}");
        }
        // spans twice the base footprint
        let xs: Vec<f64> = vla.positions.iter().map(|p| p[0]).collect();
        let span = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert_relative_eq!(span, (cols as f64 - 1.0) * pitch, max_relative = 1e-9);
    }
}
