//! Region maps on the Fig-2 style generator and random inputs.

mod common;

use common::{random_kernel, rng, sha256_hex};
use rand::Rng;
use robinson_core::regions::{cell_crosses, largest_grey_square, BoundaryCurve};
use robinson_core::render::regions_svg;
use robinson_core::synth::figure_two;
use robinson_core::{compute_regions, regions_csv, verify_partition, RegionMap};

const PINNED_CSV: &str = "fca43824dba2ffff3880dc50640882fc4e6114c2a3c4e7177744b81461a495be";
const PINNED_SVG: &str = "67ecf0e35a9f26d1ab213976415af39a14716b39aa56635c7901b5485c885711";

fn figure_map() -> RegionMap {
    compute_regions(&figure_two(16), 4, 0.1, 128).unwrap()
}

#[test]
fn figure_two_map_is_pinned() {
    let rm = figure_map();
    assert!(verify_partition(&rm));
    let csv = regions_csv(&rm);
    let svg = regions_svg(&rm, "regions, m = 4, alpha = 0.1");
    assert_eq!(csv, regions_csv(&figure_map()));
    let (hc, hs) = (sha256_hex(csv.as_bytes()), sha256_hex(svg.as_bytes()));
    assert_eq!((hc.as_str(), hs.as_str()), (PINNED_CSV, PINNED_SVG));
}

#[test]
fn csv_lists_every_pixel_of_the_triangle() {
    let rm = compute_regions(&figure_two(8), 2, 0.2, 16).unwrap();
    let csv = regions_csv(&rm);
    assert_eq!(csv.lines().count(), 1 + 16 * 17 / 2);
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 6));
}

/// Cells of the `β` grid whose top-left corner is above the curve and whose
/// bottom-right corner is below it.
fn crossings(curve: &BoundaryCurve, cells: usize) -> usize {
    let b = 1.0 / cells as f64;
    let mut count = 0;
    for a in 0..cells {
        for c in 0..cells {
            let (x0, z0) = (a as f64 * b, c as f64 * b);
            count += usize::from(cell_crosses(x0, x0 + b, z0, z0 + b, curve));
        }
    }
    count
}

#[test]
fn curves_cross_few_cells() {
    let mut r = rng(41);
    let mut maps = vec![figure_map()];
    for _ in 0..6 {
        let n = r.random_range(2..=8);
        let w = random_kernel(&mut r, n, 0.0, 2.0);
        maps.push(compute_regions(&w, 3, 0.1, 64).unwrap());
    }
    for rm in &maps {
        for k in 0..rm.levels() {
            for curve in [rm.f_curve(k), rm.g_curve(k.max(1))] {
                for cells in [4usize, 8, 10, 16] {
                    let got = crossings(&curve, cells);
                    assert!(got <= 2 * cells, "level {k}, {cells} cells: {got} crossings");
                }
            }
        }
    }
}

#[test]
fn black_shrinks_and_white_grows_with_level() {
    let mut r = rng(42);
    for _ in 0..10 {
        let n = r.random_range(2..=8);
        let w = random_kernel(&mut r, n, 0.0, 1.5);
        let rm = compute_regions(&w, r.random_range(1..=4), 0.1, 48).unwrap();
        for k in 1..=rm.levels() {
            for i in 0..rm.raster {
                for j in i..rm.raster {
                    assert!(!rm.in_black(k, i, j) || rm.in_black(k - 1, i, j));
                    assert!(!rm.in_white(k - 1, i, j) || rm.in_white(k, i, j));
                }
            }
        }
        for k in 0..=rm.levels() {
            assert!(largest_grey_square(&rm, k) <= rm.alpha + 2.0 / rm.raster as f64);
        }
    }
}
