//! Writes the constructed families to `data/` as JSON.

use std::path::PathBuf;

use thickknot::families::{self, Family};
use thickknot::projection::Direction;
use thickknot::sweep::PolygonPath;

fn single(name: &str, path: PolygonPath) -> Family {
    Family {
        name: name.into(),
        direction: Direction::z(),
        paths: vec![(name.into(), path)],
    }
}

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(&out)?;
    let all = [
        ("curl", single("curl", families::curl_insertion())),
        ("push_over", single("push-over", families::push_over())),
        ("trigon_slide", single("trigon-slide", families::trigon_slide())),
        ("octagon", single("octagon", families::rotating_octagon())),
        ("unknot_moves", families::unknot_moves()),
        ("two_cluster", families::two_cluster().0),
        ("three_cluster", families::three_cluster().0),
    ];
    for (file, family) in all {
        std::fs::write(out.join(format!("{file}.json")), family.to_json())?;
    }
    std::fs::write(out.join("trefoil96.json"), families::trefoil(96).to_json())?;
    Ok(())
}
