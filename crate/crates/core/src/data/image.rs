use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};

/// 8-bit image with interleaved channels, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl ImageTensor {
    pub fn new(height: usize, width: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument("image has no pixels".into()));
        }
        if pixels.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "{} bytes for a {height}x{width}x{channels} image",
                pixels.len()
            )));
        }
        Ok(Self { height, width, channels, pixels })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> u8 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }

    fn from_region(&self, ys: impl Iterator<Item = usize> + Clone, xs: impl Iterator<Item = usize> + Clone) -> Self {
        let mut pixels = Vec::new();
        let mut height = 0;
        let mut width = 0;
        for y in ys {
            height += 1;
            width = 0;
            for x in xs.clone() {
                width += 1;
                let at = (y * self.width + x) * self.channels;
                pixels.extend_from_slice(&self.pixels[at..at + self.channels]);
            }
        }
        Self { height, width, channels: self.channels, pixels }
    }
}

/// Keeps pixels at even row and column indices.
pub fn subsample_stride2(img: &ImageTensor) -> Result<ImageTensor> {
    if img.height < 2 || img.width < 2 {
        return Err(Error::InvalidArgument(format!(
            "cannot subsample a {}x{} image",
            img.height, img.width
        )));
    }
    Ok(img.from_region((0..img.height).step_by(2), (0..img.width).step_by(2)))
}

pub fn subsample_frames_stride2(frames: &[ImageTensor]) -> Result<Vec<ImageTensor>> {
    frames.iter().map(subsample_stride2).collect()
}

/// Central `height x width` region; odd margins leave the extra row or
/// column at the bottom and right.
pub fn center_crop(img: &ImageTensor, height: usize, width: usize) -> Result<ImageTensor> {
    if height == 0 || width == 0 || height > img.height || width > img.width {
        return Err(Error::InvalidArgument(format!(
            "cannot crop {}x{} to {height}x{width}",
            img.height, img.width
        )));
    }
    let top = (img.height - height) / 2;
    let left = (img.width - width) / 2;
    Ok(img.from_region(top..top + height, left..left + width))
}

fn png_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Png {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Reads an 8-bit PNG. Palettes are expanded and alpha is dropped.
pub fn load_image(path: &Path) -> Result<ImageTensor> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| png_error(path, e))?;
    if reader.info().bit_depth == BitDepth::Sixteen {
        return Err(png_error(path, "16-bit images are not supported"));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_error(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| png_error(path, e))?;
    let (height, width) = (info.height as usize, info.width as usize);
    let src_channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => return Err(png_error(path, "palette was not expanded")),
    };
    let channels = if src_channels < 3 { 1 } else { 3 };
    let mut pixels = Vec::with_capacity(height * width * channels);
    for row in buf.chunks(info.line_size).take(height) {
        for px in row[..width * src_channels].chunks(src_channels) {
            pixels.extend_from_slice(&px[..channels]);
        }
    }
    ImageTensor::new(height, width, channels, pixels)
}

pub fn save_image(path: &Path, img: &ImageTensor) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    encoder.set_color(if img.channels == 1 { ColorType::Grayscale } else { ColorType::Rgb });
    encoder.set_depth(BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| png_error(path, e))?;
    writer.write_image_data(&img.pixels).map_err(|e| png_error(path, e))?;
    writer.finish().map_err(|e| png_error(path, e))
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.png")
}

/// Frames `frame_00000.png`, `frame_00001.png`, ... from `dir`, in order.
pub fn load_frames(dir: &Path) -> Result<Vec<ImageTensor>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        let numbered = name
            .strip_prefix("frame_")
            .and_then(|s| s.strip_suffix(".png"))
            .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()));
        if numbered {
            paths.push(entry.path());
        }
    }
    if paths.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no frame_NNNNN.png files in {}",
            dir.display()
        )));
    }
    paths.sort();
    paths.iter().map(|p| load_image(p)).collect()
}

pub fn save_frames(dir: &Path, frames: &[ImageTensor]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let path = dir.join(frame_file_name(i));
            save_image(&path, f)?;
            Ok(path)
        })
        .collect()
}
