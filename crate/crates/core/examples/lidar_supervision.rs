//! Builds BEV supervision for a small hand-placed scene and prints the masks
//! as ASCII (`#` occupied, `.` free, `?` unknown, blank outside the HFOV).
//!
//! ```text
//! cargo run --release --example lidar_supervision -- [scene.txt]
//! ```
//!
//! The optional scene file uses the `Scene::parse` text format.

use std::path::Path;

use rdbev::lidar::{simulate_lidar, LidarConfig};
use rdbev::supervision::supervise_cloud;
use rdbev::{hfov_mask, BevGridSpec, RadarConfig, Scatterer, Scene};

fn main() -> rdbev::Result<()> {
    let scene = match std::env::args().nth(1) {
        Some(p) => Scene::read(Path::new(&p))?,
        None => Scene::new(vec![
            Scatterer {
                radius: 2.0,
                ..Scatterer::polar(15.0, 0.0)
            },
            Scatterer {
                radius: 1.0,
                ..Scatterer::polar(30.0, -20.0)
            },
            Scatterer {
                radius: 3.0,
                ..Scatterer::polar(45.0, 15.0)
            },
        ]),
    };
    let radar = RadarConfig::default();
    let grid = BevGridSpec::new(0.5)?;
    let lidar = LidarConfig::default();
    let cloud = simulate_lidar(&scene, &lidar)?;
    let hfov = hfov_mask(&grid, (0.0, 0.0), radar.hfov_deg, radar.max_range);
    let sup = supervise_cloud(&cloud, &grid, &hfov, lidar.ground_threshold, 0.05)?;

    let obstacle = cloud.iter().filter(|(_, g)| !g).count();
    println!("{} points ({obstacle} obstacle returns)", cloud.len());
    println!(
        "HFOV {} cells: supervised {}, unknown {}, occupied {}",
        hfov.count(),
        sup.sup.count(),
        sup.unknown.count(),
        sup.label.occupancy().count()
    );

    // far rows first so +x points up; every other cell to fit a terminal
    for i in (0..grid.height).rev().step_by(2) {
        let line: String = (0..grid.width)
            .step_by(2)
            .map(|j| {
                match (
                    hfov.get(i, j),
                    sup.label.observable().get(i, j),
                    sup.label.occupancy().get(i, j),
                ) {
                    (false, _, _) => ' ',
                    (true, _, true) => '#',
                    (true, true, false) => '.',
                    (true, false, false) => '?',
                }
            })
            .collect();
        println!("{}", line.trim_end());
    }
    Ok(())
}
