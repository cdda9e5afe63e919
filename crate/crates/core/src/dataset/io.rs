use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetMeta, Labels, Sample};
use crate::error::{Error, Result};
use crate::grid::PHASES;
use crate::sim::FaultType;

pub const MAGIC: [u8; 4] = *b"GFDS";
pub const VERSION: u16 = 1;
/// Magic, version, then N, d, K and the sample count as u32.
pub const HEADER_BYTES: usize = 4 + 2 + 4 * 4;
/// event u8, type u8, phase u8, location u16.
pub const LABEL_BYTES: usize = 5;

const INVALID_PHASE: u8 = u8::MAX;
const INVALID_LOCATION: u16 = u16::MAX;

/// The JSON sidecar next to a dataset file.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn u32_field(value: usize, what: &str) -> Result<[u8; 4]> {
    u32::try_from(value)
        .map(u32::to_le_bytes)
        .map_err(|_| Error::InvalidArgument(format!("{what} {value} does not fit the file format")))
}

/// Writes the binary file and its metadata sidecar. Feature blocks for all
/// samples come first, followed by the label block.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = dataset.n_buses();
    if n >= INVALID_LOCATION as usize {
        return Err(Error::InvalidArgument(format!("{n} buses exceed the location label range")));
    }
    let width = dataset.feature_len();
    if let Some(s) = dataset.samples.iter().find(|s| s.features.len() != width) {
        return Err(Error::shape("save_dataset", &[s.features.len()], &[width]));
    }
    if dataset.meta.n_samples != dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "metadata lists {} samples, dataset holds {}",
            dataset.meta.n_samples,
            dataset.len()
        )));
    }

    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&u32_field(n, "bus count")?)?;
    out.write_all(&u32_field(PHASES, "feature width")?)?;
    out.write_all(&u32_field(dataset.window(), "window")?)?;
    out.write_all(&u32_field(dataset.len(), "sample count")?)?;
    for s in &dataset.samples {
        for x in &s.features {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    for s in &dataset.samples {
        let l = &s.labels;
        out.write_all(&[
            l.event as u8,
            l.fault_type.index() as u8,
            l.phase.unwrap_or(INVALID_PHASE),
        ])?;
        out.write_all(&l.location.unwrap_or(INVALID_LOCATION).to_le_bytes())?;
    }
    out.flush()?;

    let mut meta = serde_json::to_string_pretty(&dataset.meta)?;
    meta.push('\n');
    fs::write(metadata_path(path), meta)?;
    Ok(())
}

fn read_u32(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice")) as usize
}

fn decode_labels(raw: &[u8], n_buses: usize) -> std::result::Result<Labels, String> {
    let event = match raw[0] {
        0 => false,
        1 => true,
        b => return Err(format!("event byte {b}")),
    };
    let fault_type = FaultType::from_index(raw[1] as usize).ok_or_else(|| format!("fault type byte {}", raw[1]))?;
    if event != (fault_type != FaultType::NF) {
        return Err(format!("event {event} disagrees with type {}", fault_type.name()));
    }
    let phase = match raw[2] {
        INVALID_PHASE => None,
        p if (p as usize) < PHASES => Some(p),
        p => return Err(format!("phase byte {p}")),
    };
    let location = match u16::from_le_bytes([raw[3], raw[4]]) {
        INVALID_LOCATION => None,
        l if (l as usize) < n_buses => Some(l),
        l => return Err(format!("location {l} outside {n_buses} buses")),
    };
    Ok(Labels {
        event,
        fault_type,
        phase,
        location,
    })
}

/// Reads a dataset written by [`save_dataset`], validating the header against
/// the sidecar metadata and the file length against the header.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(metadata_path(path))?)?;
    let bytes = fs::read(path)?;
    let corrupt = |reason: String| Error::corrupt(path, reason);

    if bytes.len() < HEADER_BYTES {
        return Err(corrupt(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(corrupt("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let (n, d, k, count) = (
        read_u32(&bytes, 6),
        read_u32(&bytes, 10),
        read_u32(&bytes, 14),
        read_u32(&bytes, 18),
    );
    if d != PHASES || n != meta.n_buses || k != meta.window || count != meta.n_samples {
        return Err(Error::shape(
            "load_dataset",
            &[count, n, d, k],
            &[meta.n_samples, meta.n_buses, PHASES, meta.window],
        ));
    }
    let width = n * d * k;
    let expected = HEADER_BYTES + count * (width * 4 + LABEL_BYTES);
    if bytes.len() != expected {
        return Err(corrupt(format!("length {} but header implies {expected}", bytes.len())));
    }

    let features = &bytes[HEADER_BYTES..HEADER_BYTES + count * width * 4];
    let labels = &bytes[HEADER_BYTES + count * width * 4..];
    let mut samples = Vec::with_capacity(count);
    for (block, raw) in features.chunks_exact(width * 4).zip(labels.chunks_exact(LABEL_BYTES)) {
        let features = block
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4-byte slice")))
            .collect();
        let labels = decode_labels(raw, n).map_err(|r| corrupt(format!("sample {}: {r}", samples.len())))?;
        samples.push(Sample { features, labels });
    }
    Ok(Dataset { meta, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::WindowSelection;
    use crate::sim::WaveformParams;

    fn toy(count: usize) -> Dataset {
        let (n, k) = (4, 5);
        let samples = (0..count)
            .map(|i| {
                let labels = if i % 3 == 0 {
                    Labels::no_fault()
                } else {
                    Labels {
                        event: true,
                        fault_type: FaultType::LL,
                        phase: Some((i % 3) as u8),
                        location: Some((i % n) as u16),
                    }
                };
                Sample {
                    features: (0..n * 3 * k).map(|j| (i * 100 + j) as f32 * 0.013 - 0.7).collect(),
                    labels,
                }
            })
            .collect();
        Dataset {
            meta: DatasetMeta {
                system: "toy".into(),
                network: "toy".into(),
                bus_names: (1..=n).map(|b| b.to_string()).collect(),
                n_buses: n,
                window: k,
                n_samples: count,
                measured_buses: (0..n).collect(),
                seed: 7,
                snr_db: None,
                selection: WindowSelection::FaultSpanning,
                waveform: WaveformParams::default(),
                adjacency: vec![vec![0.0; n]; n],
                grid: None,
            },
            samples,
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.gfds");
        let d = toy(10);
        save_dataset(&d, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back, d);
        let bits = |d: &Dataset| d.samples.iter().flat_map(|s| s.features.iter().map(|x| x.to_bits())).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&d));
    }

    #[test]
    fn file_size_matches_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.gfds");
        save_dataset(&toy(10), &path).unwrap();
        let size = fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(size, 22 + 10 * 4 * 3 * 5 * 4 + 10 * 5);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.gfds");
        save_dataset(&toy(3), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn bad_magic_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.gfds");
        save_dataset(&toy(2), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, bytes).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn header_metadata_mismatch_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.gfds");
        let mut d = toy(2);
        save_dataset(&d, &path).unwrap();
        d.meta.window = 6;
        fs::write(metadata_path(&path), serde_json::to_string(&d.meta).unwrap()).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Shape { .. })));
    }
}
