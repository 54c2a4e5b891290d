//! Mapping between media files and tensors.
//!
//! 8-bit channels map to `[0, 1]` by `v / 255`. Saving clamps to `[0, 1]` and
//! rounds half-up back to 8 bits. Frames stack along the last mode; for color
//! video the channel mode precedes the frame mode. `.tns` files are stored
//! without quantization.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ExtendedColorType, ImageReader};

use crate::error::{Error, Result};
use crate::tensor::Tensor;
use crate::tns;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MediaKind {
    /// `m x n x 3`, channels along mode 3.
    ColorImage,
    /// `m x n x 1`.
    GrayImage,
    /// `m x n x frames`.
    GrayVideo,
    /// `m x n x 3 x frames`.
    ColorVideo,
    /// Any shape, stored in a `.tns` container.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediaMapping {
    pub kind: MediaKind,
    pub peak: f64,
}

impl MediaMapping {
    pub fn new(kind: MediaKind) -> Self {
        Self { kind, peak: 1.0 }
    }

    /// Check that `t` has the shape this mapping declares.
    pub fn check(&self, t: &Tensor) -> Result<()> {
        let d = t.dims();
        let ok = match self.kind {
            MediaKind::ColorImage => d.len() == 3 && d[2] == 3,
            MediaKind::GrayImage => d.len() == 2 || (d.len() == 3 && d[2] == 1),
            MediaKind::GrayVideo => d.len() == 3,
            MediaKind::ColorVideo => d.len() == 4 && d[2] == 3,
            MediaKind::Raw => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dims {
                dims: d.to_vec(),
                reason: format!("not a valid {:?} tensor", self.kind),
            })
        }
    }

    /// Mapping for reading `path`: `.tns` is raw, a PNG is a color or gray
    /// image by its color type, a directory is a video by its first frame.
    pub fn infer_for_load(path: &Path) -> Result<Self> {
        if is_tns(path) {
            return Ok(Self::new(MediaKind::Raw));
        }
        if path.is_dir() {
            let frames = list_frames(path)?;
            let first = frames
                .first()
                .ok_or_else(|| Error::media(path, "no PNG frames in directory"))?;
            let kind = if is_gray(open_checked(first)?.color()) {
                MediaKind::GrayVideo
            } else {
                MediaKind::ColorVideo
            };
            return Ok(Self::new(kind));
        }
        let kind = if is_gray(open_checked(path)?.color()) {
            MediaKind::GrayImage
        } else {
            MediaKind::ColorImage
        };
        Ok(Self::new(kind))
    }

    /// Mapping for writing `t` to `path`: `.tns` is raw, `.png` is an image
    /// (color when the last extent is 3), anything else a frame directory.
    pub fn infer_for_save(path: &Path, t: &Tensor) -> Self {
        let d = t.dims();
        let kind = if is_tns(path) {
            MediaKind::Raw
        } else if has_extension(path, "png") {
            if d.len() == 3 && d[2] == 3 {
                MediaKind::ColorImage
            } else {
                MediaKind::GrayImage
            }
        } else if d.len() == 4 {
            MediaKind::ColorVideo
        } else {
            MediaKind::GrayVideo
        };
        Self::new(kind)
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn is_tns(path: &Path) -> bool {
    has_extension(path, "tns")
}

fn is_gray(c: ColorType) -> bool {
    matches!(c, ColorType::L8 | ColorType::La8)
}

fn open_checked(path: &Path) -> Result<DynamicImage> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::Rgb8 | ColorType::Rgba8 => Ok(img),
        other => Err(Error::media(
            path,
            format!("unsupported bit depth / color type {other:?}; 8-bit images only"),
        )),
    }
}

fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && has_extension(p, "png"))
        .collect();
    frames.sort();
    Ok(frames)
}

pub fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{:06}.png", index + 1))
}

/// Channel samples of one image in row-major order, `channels` per pixel.
fn image_samples(path: &Path, channels: usize) -> Result<(usize, usize, Vec<u8>)> {
    let img = open_checked(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let raw = if channels == 3 {
        img.to_rgb8().into_raw()
    } else {
        img.to_luma8().into_raw()
    };
    Ok((h, w, raw))
}

fn to_unit(v: u8) -> f64 {
    v as f64 / 255.0
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn load(path: impl AsRef<Path>, mapping: &MediaMapping) -> Result<Tensor> {
    let path = path.as_ref();
    let t = match mapping.kind {
        MediaKind::Raw => tns::load(path)?,
        MediaKind::ColorImage | MediaKind::GrayImage => {
            let channels = if mapping.kind == MediaKind::ColorImage {
                3
            } else {
                1
            };
            let (h, w, raw) = image_samples(path, channels)?;
            Tensor::from_vec(&[h, w, channels], raw.into_iter().map(to_unit).collect())?
        }
        MediaKind::GrayVideo | MediaKind::ColorVideo => {
            let channels = if mapping.kind == MediaKind::ColorVideo {
                3
            } else {
                1
            };
            let frames = list_frames(path)?;
            if frames.is_empty() {
                return Err(Error::media(path, "no PNG frames in directory"));
            }
            let mut size = None;
            let mut samples = Vec::with_capacity(frames.len());
            for f in &frames {
                let (h, w, raw) = image_samples(f, channels)?;
                match size {
                    None => size = Some((h, w)),
                    Some(s) if s != (h, w) => {
                        return Err(Error::media(
                            f,
                            format!("frame is {w}x{h}, expected {}x{}", s.1, s.0),
                        ))
                    }
                    Some(_) => {}
                }
                samples.push(raw);
            }
            let (h, w) = size.expect("at least one frame");
            let count = frames.len();
            let dims = if channels == 3 {
                vec![h, w, 3, count]
            } else {
                vec![h, w, count]
            };
            // pixel (i, j), channel c of frame f
            Tensor::from_fn(&dims, |idx| {
                let (i, j) = (idx[0], idx[1]);
                let (c, f) = if channels == 3 {
                    (idx[2], idx[3])
                } else {
                    (0, idx[2])
                };
                to_unit(samples[f][(i * w + j) * channels + c])
            })
        }
    };
    mapping.check(&t)?;
    Ok(t)
}

fn write_png(path: &Path, h: usize, w: usize, channels: usize, buf: &[u8]) -> Result<()> {
    let color = if channels == 3 {
        ExtendedColorType::Rgb8
    } else {
        ExtendedColorType::L8
    };
    image::save_buffer_with_format(
        path,
        buf,
        w as u32,
        h as u32,
        color,
        image::ImageFormat::Png,
    )
    .map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save(t: &Tensor, path: impl AsRef<Path>, mapping: &MediaMapping) -> Result<()> {
    let path = path.as_ref();
    mapping.check(t)?;
    let d = t.dims();
    match mapping.kind {
        MediaKind::Raw => tns::save(t, path),
        MediaKind::ColorImage | MediaKind::GrayImage => {
            let channels = if mapping.kind == MediaKind::ColorImage {
                3
            } else {
                1
            };
            let buf: Vec<u8> = t.as_slice().iter().map(|&v| quantize(v)).collect();
            write_png(path, d[0], d[1], channels, &buf)
        }
        MediaKind::GrayVideo | MediaKind::ColorVideo => {
            let color = mapping.kind == MediaKind::ColorVideo;
            let (h, w) = (d[0], d[1]);
            let channels = if color { 3 } else { 1 };
            let count = *d.last().expect("order checked");
            fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
            for f in 0..count {
                let mut buf = Vec::with_capacity(h * w * channels);
                for i in 0..h {
                    for j in 0..w {
                        for c in 0..channels {
                            let idx: &[usize] = if color { &[i, j, c, f] } else { &[i, j, f] };
                            buf.push(quantize(t.get(idx).expect("in range")));
                        }
                    }
                }
                write_png(&frame_path(path, f), h, w, channels, &buf)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_rounds_half_up() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-0.3), 0);
        assert_eq!(quantize(1.7), 255);
        assert_eq!(quantize(254.5 / 255.0), 255);
        for v in 0..=255u8 {
            assert_eq!(quantize(to_unit(v)), v);
        }
    }

    #[test]
    fn png_round_trip_within_half_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("half.png");
        let t = Tensor::full(&[5, 4, 3], 0.5);
        let m = MediaMapping::new(MediaKind::ColorImage);
        save(&t, &path, &m).unwrap();
        let back = load(&path, &m).unwrap();
        assert_eq!(back.dims(), &[5, 4, 3]);
        for v in back.as_slice() {
            assert!(*v == 127.0 / 255.0 || *v == 128.0 / 255.0);
            assert!((v - 0.5).abs() <= 1.0 / 510.0);
        }
        assert_eq!(
            MediaMapping::infer_for_load(&path).unwrap().kind,
            MediaKind::ColorImage
        );
    }

    #[test]
    fn png_round_trip_clamps() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let t = Tensor::from_fn(&[6, 7, 1], |i| {
            (i[0] as f64 - 2.0) * 0.31 + i[1] as f64 * 0.01
        });
        let m = MediaMapping::new(MediaKind::GrayImage);
        save(&t, &path, &m).unwrap();
        let back = load(&path, &m).unwrap();
        let clamped = t.map(|v| v.clamp(0.0, 1.0));
        for (a, b) in back.as_slice().iter().zip(clamped.as_slice()) {
            assert!((a - b).abs() <= 1.0 / 510.0 + 1e-15);
        }
        assert_eq!(
            MediaMapping::infer_for_load(&path).unwrap().kind,
            MediaKind::GrayImage
        );
    }

    #[test]
    fn pixel_layout_is_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("layout.png");
        let mut t = Tensor::zeros(&[2, 3, 3]);
        t.set(&[1, 2, 0], 1.0);
        t.set(&[0, 1, 2], 1.0);
        save(&t, &path, &MediaMapping::new(MediaKind::ColorImage)).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.get_pixel(2, 1).0, [255, 0, 0]);
        assert_eq!(img.get_pixel(1, 0).0, [0, 0, 255]);
    }

    #[test]
    fn gray_video_stacks_frames() {
        let dir = tempfile::tempdir().unwrap();
        let video = dir.path().join("clip");
        let t = Tensor::from_fn(&[4, 4, 3], |i| i[2] as f64 / 2.0);
        let m = MediaMapping::new(MediaKind::GrayVideo);
        save(&t, &video, &m).unwrap();
        assert!(frame_path(&video, 0).ends_with("frame_000001.png"));
        assert!(frame_path(&video, 2).exists());
        let back = load(&video, &m).unwrap();
        assert_eq!(back.dims(), &[4, 4, 3]);
        assert!(back.distance(&t).unwrap() <= 1e-12 + 16.0f64.sqrt() * 3.0 / 510.0);
        assert_eq!(back.get(&[1, 1, 2]), Some(1.0));
        assert_eq!(
            MediaMapping::infer_for_load(&video).unwrap().kind,
            MediaKind::GrayVideo
        );
    }

    #[test]
    fn color_video_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let video = dir.path().join("rgb");
        let t = Tensor::from_fn(&[3, 5, 3, 2], |i| {
            ((i[0] + i[1] + i[2] + i[3]) % 5) as f64 / 4.0
        });
        let m = MediaMapping::new(MediaKind::ColorVideo);
        save(&t, &video, &m).unwrap();
        let back = load(&video, &m).unwrap();
        assert_eq!(back.dims(), t.dims());
        assert!(back
            .as_slice()
            .iter()
            .zip(t.as_slice())
            .all(|(a, b)| (a - b).abs() <= 1.0 / 510.0));
        assert_eq!(
            MediaMapping::infer_for_load(&video).unwrap().kind,
            MediaKind::ColorVideo
        );
    }

    #[test]
    fn inconsistent_frames_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_png(&dir.path().join("frame_000001.png"), 4, 4, 1, &[0; 16]).unwrap();
        write_png(&dir.path().join("frame_000002.png"), 4, 5, 1, &[0; 20]).unwrap();
        let err = load(dir.path(), &MediaMapping::new(MediaKind::GrayVideo)).unwrap_err();
        assert!(matches!(err, Error::Media { .. }), "{err}");
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        image::save_buffer(&path, &[0u8; 2 * 4], 2, 2, ExtendedColorType::L16).unwrap();
        let err = load(&path, &MediaMapping::new(MediaKind::GrayImage)).unwrap_err();
        assert!(err.to_string().contains("8-bit"), "{err}");
    }

    #[test]
    fn tns_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tns");
        let t = Tensor::from_fn(&[3, 2, 2, 2], |i| (i[0] as f64 - 1.3) / 7.0);
        let m = MediaMapping::infer_for_save(&path, &t);
        assert_eq!(m.kind, MediaKind::Raw);
        save(&t, &path, &m).unwrap();
        assert_eq!(load(&path, &m).unwrap(), t);
    }

    #[test]
    fn mapping_checks_shapes() {
        let m = MediaMapping::new(MediaKind::ColorImage);
        assert!(m.check(&Tensor::zeros(&[4, 4, 3])).is_ok());
        assert!(m.check(&Tensor::zeros(&[4, 4, 2])).is_err());
        assert!(MediaMapping::new(MediaKind::ColorVideo)
            .check(&Tensor::zeros(&[4, 4, 3]))
            .is_err());
    }

    #[test]
    fn missing_file_is_an_error() {
        let m = MediaMapping::new(MediaKind::ColorImage);
        assert!(load("/nonexistent/nothing.png", &m).is_err());
    }
}
