//! Layered-ASCII environment files.
//!
//! ```text
//! voxelworld <nx> <ny> <nz> <edge>
//! <ny lines of nx chars: '.' free, '#' occupied>   (z = 0, floor layer)
//! --
//! <ny lines ...>                                   (z = 1)
//! ...
//! ```
//! Line `r` of a block is row `y = r`, character `c` is column `x = c`. The
//! map origin is `(0, 0, 0)`.

use std::fmt::Write;

use super::voxel::{Occupancy, VoxelMap};
use crate::error::ParseError;
use crate::geometry::Point3;

const HEADER: &str = "voxelworld";
const ROBOT_MAP_HEADER: &str = "robotmap";
const SEPARATOR: &str = "--";

/// Parses a ground-truth environment. Every voxel of the result is known.
pub fn load_environment(text: &str) -> Result<VoxelMap, ParseError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim_end_matches('\r')));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "empty environment file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != HEADER {
        return Err(ParseError::new(
            hline,
            format!("expected header `{HEADER} <nx> <ny> <nz> <edge>`, found `{header}`"),
        ));
    }
    let dim = |s: &str, name: &str| -> Result<usize, ParseError> {
        match s.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(ParseError::new(hline, format!("{name} must be a positive integer, found `{s}`"))),
        }
    };
    let nx = dim(fields[1], "nx")?;
    let ny = dim(fields[2], "ny")?;
    let nz = dim(fields[3], "nz")?;
    let edge: f64 = match fields[4].parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => v,
        _ => {
            return Err(ParseError::new(
                hline,
                format!("edge length must be a positive number, found `{}`", fields[4]),
            ))
        }
    };

    let mut map = VoxelMap::new(Point3::default(), edge, [nx, ny, nz]);
    let mut last_line = hline;
    for z in 0..nz {
        if z > 0 {
            match lines.next() {
                Some((_, l)) if l.trim() == SEPARATOR => {}
                Some((n, l)) => {
                    return Err(ParseError::new(
                        n,
                        format!("expected layer separator `{SEPARATOR}` before layer {z}, found `{l}`"),
                    ))
                }
                None => {
                    return Err(ParseError::new(
                        last_line + 1,
                        format!("missing layer {z}: file declares {nz} layers"),
                    ))
                }
            }
        }
        for y in 0..ny {
            let (n, row) = lines.next().ok_or_else(|| {
                ParseError::new(
                    last_line + 1,
                    format!("layer {z} ends after {y} rows, expected {ny}"),
                )
            })?;
            last_line = n;
            if row.trim() == SEPARATOR {
                return Err(ParseError::new(n, format!("layer {z} has {y} rows, expected {ny}")));
            }
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != nx {
                return Err(ParseError::new(
                    n,
                    format!("layer {z} row {y} has {} columns, expected {nx}", chars.len()),
                ));
            }
            for (x, c) in chars.into_iter().enumerate() {
                let state = match c {
                    '.' => Occupancy::Free,
                    '#' => Occupancy::Occupied,
                    other => {
                        return Err(ParseError::new(
                            n,
                            format!("illegal cell character `{other}` at column {}", x + 1),
                        ))
                    }
                };
                map.set([x as i64, y as i64, z as i64], state);
            }
        }
    }
    for (n, l) in lines {
        if !l.trim().is_empty() {
            return Err(ParseError::new(n, format!("unexpected content after layer {}: `{l}`", nz - 1)));
        }
    }
    Ok(map)
}

/// Serialises a fully known map in the environment format.
///
/// Panics if the map contains Unknown voxels; use [`dump_robot_map`] for those.
pub fn write_environment(map: &VoxelMap) -> String {
    assert_eq!(map.known_voxels(), map.len(), "environment maps must be fully known");
    write_layers(map, HEADER)
}

/// Serialises a partially known map; Unknown voxels are written as `?`.
pub fn dump_robot_map(map: &VoxelMap) -> String {
    write_layers(map, ROBOT_MAP_HEADER)
}

fn write_layers(map: &VoxelMap, header: &str) -> String {
    let [nx, ny, nz] = map.dims();
    let mut out = String::with_capacity((nx + 1) * ny * nz + nz * 3 + 64);
    writeln!(out, "{header} {nx} {ny} {nz} {}", map.edge_length()).unwrap();
    for z in 0..nz {
        if z > 0 {
            out.push_str(SEPARATOR);
            out.push('\n');
        }
        for y in 0..ny {
            for x in 0..nx {
                out.push(match map.get([x as i64, y as i64, z as i64]) {
                    Occupancy::Free => '.',
                    Occupancy::Occupied => '#',
                    Occupancy::Unknown => '?',
                });
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_room_is_all_free() {
        let m = load_environment("voxelworld 3 3 1 0.1\n...\n...\n...").unwrap();
        assert_eq!(m.count(Occupancy::Free), 9);
        assert_eq!(m.count(Occupancy::Occupied), 0);
        assert_eq!(m.known_voxels(), 9);
    }

    #[test]
    fn border_walls_are_occupied() {
        let text = "voxelworld 4 3 1 0.1\n####\n#..#\n####\n";
        let m = load_environment(text).unwrap();
        assert_eq!(m.count(Occupancy::Occupied), 10);
        assert_eq!(m.get([1, 1, 0]), Occupancy::Free);
        assert_eq!(m.get([0, 1, 0]), Occupancy::Occupied);
    }

    #[test]
    fn layers_are_stacked_floor_first() {
        let text = "voxelworld 2 1 2 0.5\n##\n--\n..\n";
        let m = load_environment(text).unwrap();
        assert_eq!(m.get([0, 0, 0]), Occupancy::Occupied);
        assert_eq!(m.get([1, 0, 1]), Occupancy::Free);
        assert_eq!(m.edge_length(), 0.5);
    }

    #[test]
    fn bad_header_names_line_one() {
        let err = load_environment("voxels 2 2 1 0.1\n..\n..").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn illegal_character_names_its_line() {
        let err = load_environment("voxelworld 2 2 1 0.1\n..\n.x\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains('x'));
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let short_row = load_environment("voxelworld 3 2 1 0.1\n...\n..\n").unwrap_err();
        assert_eq!(short_row.line, 3);
        let missing_layer = load_environment("voxelworld 2 1 2 0.1\n..\n").unwrap_err();
        assert!(missing_layer.message.contains("layer"));
        let too_few_rows = load_environment("voxelworld 2 2 2 0.1\n..\n--\n..\n..\n").unwrap_err();
        assert_eq!(too_few_rows.line, 3);
        let extra = load_environment("voxelworld 1 1 1 0.1\n.\n.\n").unwrap_err();
        assert_eq!(extra.line, 3);
    }

    #[test]
    fn written_environment_parses_back() {
        let text = "voxelworld 3 2 2 0.25\n#.#\n...\n--\n.#.\n###\n";
        let m = load_environment(text).unwrap();
        assert_eq!(write_environment(&m), text);
    }

    #[test]
    fn robot_map_dump_marks_unknown() {
        let mut m = VoxelMap::new(Point3::default(), 0.1, [2, 1, 1]);
        m.observe([1, 0, 0], Occupancy::Occupied);
        assert_eq!(dump_robot_map(&m), "robotmap 2 1 1 0.1\n?#\n");
    }
}
