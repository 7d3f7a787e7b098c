//! On-disk datasets: one binary graymap (`P5`, maxval 255, 0 = occupied,
//! 255 = free) per world plus a `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Family, FamilyParams, ProblemInstance, Task};
use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};
use crate::ipp::{Pose, SensingGraph};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub family: Family,
    pub params: FamilyParams,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub size: [usize; 2],
    pub start: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<[u32; 2]>,
    /// Sensing node poses `[x, y, heading]` for informative-path-planning instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<[f64; 3]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub family: Family,
    pub params: FamilyParams,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub instances: Vec<ProblemInstance>,
}

pub fn encode_pgm(world: &GridWorld) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", world.width(), world.height()).into_bytes();
    out.extend(world.cells().iter().map(|&occ| if occ { 0u8 } else { 255u8 }));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GridWorld> {
    let bad = |reason: &str| Error::format("graymap", reason);
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?);
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" {
        return Err(bad("magic is not P5"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    let body = bytes.get(pos..).ok_or_else(|| bad("missing raster"))?;
    if body.len() != w * h {
        return Err(bad("raster size does not match header"));
    }
    let cells = body
        .iter()
        .map(|&b| match b {
            0 => Ok(true),
            255 => Ok(false),
            _ => Err(bad("cell byte other than 0 or 255")),
        })
        .collect::<Result<Vec<_>>>()?;
    GridWorld::from_cells(w, h, cells)
}

/// Writes graymaps and the manifest. Every instance is validated before any
/// file is touched.
pub fn write_dataset(instances: &[ProblemInstance], meta: &DatasetMeta, dir: &Path) -> Result<Manifest> {
    for (i, inst) in instances.iter().enumerate() {
        inst.validate().map_err(|e| Error::Load {
            entry: i,
            reason: format!("refusing to write malformed world: {e}"),
        })?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let file = format!("world_{i:05}.pgm");
        let path = dir.join(&file);
        fs::write(&path, encode_pgm(&inst.world)).map_err(|e| Error::io(&path, e))?;
        let size = [inst.world.width(), inst.world.height()];
        let entry = match &inst.task {
            Task::Search { start, goal } => ManifestEntry {
                file,
                size,
                start: (*start).into(),
                goal: Some((*goal).into()),
                nodes: None,
            },
            Task::Ipp { graph, start_node } => ManifestEntry {
                file,
                size,
                start: graph.nodes()[*start_node].cell().into(),
                goal: None,
                nodes: Some(graph.nodes().iter().map(|p| [p.x, p.y, p.theta]).collect()),
            },
        };
        entries.push(entry);
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        family: meta.family,
        params: meta.params.clone(),
        seed: meta.seed,
        entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format("manifest", e.to_string()))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::format("manifest", format!("unsupported version {}", manifest.version)));
    }
    let instances = manifest
        .entries
        .iter()
        .enumerate()
        .map(|(i, entry)| load_entry(dir, i, entry))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        meta: DatasetMeta {
            family: manifest.family,
            params: manifest.params,
            seed: manifest.seed,
        },
        instances,
    })
}

fn load_entry(dir: &Path, i: usize, entry: &ManifestEntry) -> Result<ProblemInstance> {
    let fail = |reason: String| Error::Load { entry: i, reason };
    let path: PathBuf = dir.join(&entry.file);
    let bytes = fs::read(&path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let world = decode_pgm(&bytes).map_err(|e| fail(e.to_string()))?;
    if [world.width(), world.height()] != entry.size {
        return Err(fail(format!(
            "graymap is {}x{}, manifest says {}x{}",
            world.width(),
            world.height(),
            entry.size[0],
            entry.size[1]
        )));
    }
    let task = match (&entry.goal, &entry.nodes) {
        (Some(goal), None) => Task::Search {
            start: Vertex::from(entry.start),
            goal: Vertex::from(*goal),
        },
        (None, Some(nodes)) => {
            let graph = SensingGraph::new(nodes.iter().map(|&[x, y, t]| Pose::new(x, y, t)).collect());
            let start = Vertex::from(entry.start);
            let start_node = graph
                .nodes()
                .iter()
                .position(|p| p.cell() == start)
                .ok_or_else(|| fail("start is not a sensing node".into()))?;
            Task::Ipp { graph, start_node }
        }
        _ => return Err(fail("entry needs exactly one of `goal` or `nodes`".into())),
    };
    let inst = ProblemInstance { world, task };
    inst.validate().map_err(|e| fail(e.to_string()))?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::{sample_search_instance, WorldSpec};

    fn meta() -> DatasetMeta {
        DatasetMeta {
            family: Family::GapWall,
            params: FamilyParams::default(),
            seed: 3,
        }
    }

    #[test]
    fn center_obstacle_graymap_bytes() {
        let w = GridWorld::from_ascii(&["...", ".#.", "..."]).unwrap();
        let bytes = encode_pgm(&w);
        let header = b"P5\n3 3\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[255, 255, 255, 255, 0, 255, 255, 255, 255]);
        assert_eq!(decode_pgm(&bytes).unwrap(), w);
    }

    #[test]
    fn empty_dataset_has_no_graymaps() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_dataset(&[], &meta(), dir.path()).unwrap();
        assert!(m.entries.is_empty());
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        assert!(read_dataset(dir.path()).unwrap().instances.is_empty());
    }

    #[test]
    fn fifty_worlds_round_trip() {
        let spec = WorldSpec::new(Family::Forest, FamilyParams::default(), 9);
        let insts: Vec<_> = (0..50).map(|i| sample_search_instance(&spec, i).unwrap().0).collect();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&insts, &meta(), dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back.instances, insts);
        assert_eq!(back.meta, meta());
    }

    #[test]
    fn missing_file_is_a_load_error() {
        let spec = WorldSpec::new(Family::GapWall, FamilyParams::default(), 1);
        let insts: Vec<_> = (0..3).map(|i| sample_search_instance(&spec, i).unwrap().0).collect();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&insts, &meta(), dir.path()).unwrap();
        fs::remove_file(dir.path().join("world_00001.pgm")).unwrap();
        match read_dataset(dir.path()) {
            Err(Error::Load { entry, .. }) => assert_eq!(entry, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn start_on_obstacle_names_entry() {
        let spec = WorldSpec::new(Family::GapWall, FamilyParams::default(), 1);
        let insts: Vec<_> = (0..3).map(|i| sample_search_instance(&spec, i).unwrap().0).collect();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&insts, &meta(), dir.path()).unwrap();
        // occupy the start cell of entry 2 directly in its graymap
        let path = dir.path().join("world_00002.pgm");
        let mut world = decode_pgm(&fs::read(&path).unwrap()).unwrap();
        let (start, _) = insts[2].start_goal().unwrap();
        world.set(start, true);
        fs::write(&path, encode_pgm(&world)).unwrap();
        match read_dataset(dir.path()) {
            Err(Error::Load { entry, reason }) => {
                assert_eq!(entry, 2);
                assert!(reason.contains("start"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let spec = WorldSpec::new(Family::GapWall, FamilyParams::default(), 1);
        let insts = vec![sample_search_instance(&spec, 0).unwrap().0];
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&insts, &meta(), dir.path()).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        m.entries[0].size = [33, 32];
        fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(Error::Load { entry: 0, .. })));
    }

    #[test]
    fn malformed_world_rejected_before_write() {
        let world = GridWorld::from_ascii(&["#.", ".."]).unwrap();
        let bad = ProblemInstance {
            world,
            task: Task::Search {
                start: Vertex::new(0, 0),
                goal: Vertex::new(1, 1),
            },
        };
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("ds");
        assert!(write_dataset(&[bad], &meta(), &out).is_err());
        assert!(!out.exists());
    }
}
