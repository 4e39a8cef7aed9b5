use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use textdet::fixture::render_text_fixture;
use textdet::pipeline::detect;
use textdet::raster::{decode_image, encode_annotated, encode_pgm, invert};
use textdet::report::{parse_config, result_json, FixtureTruth};
use textdet::service::{serve, AppState};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "textdet", version, about = "Connected-component text region detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect text regions in a PNG or PGM image and write the result JSON.
    Detect {
        image: PathBuf,
        /// JSON pipeline config; missing keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Result JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write an RGB PNG with the final boxes outlined.
        #[arg(long)]
        annotate: Option<PathBuf>,
    },
    /// Render a synthetic text fixture (PGM) and its ground-truth box.
    Fixture {
        #[arg(long)]
        text: String,
        /// Glyph height in pixels, a multiple of 7.
        #[arg(long, default_value_t = 14)]
        height: u32,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON path.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = 640)]
        canvas_width: u32,
        #[arg(long, default_value_t = 480)]
        canvas_height: u32,
        /// Left edge of the text (centered when omitted).
        #[arg(long)]
        x: Option<u32>,
        /// Top edge of the text (centered when omitted).
        #[arg(long)]
        y: Option<u32>,
        /// Render white text on black.
        #[arg(long)]
        invert: bool,
    },
    /// Run the tuning HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of images to offer.
        #[arg(long)]
        images: Option<PathBuf>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExitCode> {
    std::fs::write(path, bytes).map_err(|e| fail(EXIT_FAILURE, format!("writing {}: {e}", path.display())))
}

fn cmd_detect(image: &Path, config: Option<&Path>, out: Option<&Path>, annotate: Option<&Path>) -> Result<(), ExitCode> {
    let config = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_CONFIG, format!("reading {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))?
        }
        None => Default::default(),
    };
    let bytes = std::fs::read(image).map_err(|e| fail(EXIT_INPUT, format!("reading {}: {e}", image.display())))?;
    let img = decode_image(&bytes).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", image.display())))?;
    let result = detect(&img, &config);
    let json = result_json(&result);
    match out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => println!("{json}"),
    }
    if let Some(path) = annotate {
        let png = encode_annotated(&img, result.final_boxes()).map_err(|e| fail(EXIT_FAILURE, e))?;
        write_file(path, &png)?;
    }
    eprintln!(
        "{}: {} text region(s), primary {}",
        image.display(),
        result.final_boxes().len(),
        result.primary_box().map_or("none".to_string(), |b| b.to_string())
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fixture(
    text: &str,
    height: u32,
    out: &Path,
    truth: Option<&Path>,
    canvas: (u32, u32),
    x: Option<u32>,
    y: Option<u32>,
    inverted: bool,
) -> Result<(), ExitCode> {
    let chars = text.chars().count() as u32;
    let width = textdet::fixture::text_width(chars, (height / 7).max(1));
    let x = x.unwrap_or(canvas.0.saturating_sub(width) / 2);
    let y = y.unwrap_or(canvas.1.saturating_sub(height) / 2);
    let (img, bbox) = render_text_fixture(text, height, (x, y), canvas).map_err(|e| fail(EXIT_CONFIG, e))?;
    let img = if inverted { invert(&img) } else { img };
    write_file(out, &encode_pgm(&img))?;
    if let Some(path) = truth {
        let json = serde_json::to_string_pretty(&FixtureTruth { bbox }).expect("truth serializes");
        write_file(path, json.as_bytes())?;
    }
    Ok(())
}

fn cmd_serve(host: &str, port: u16, images: Option<&Path>) -> Result<(), ExitCode> {
    let state = Arc::new(AppState::new());
    if let Some(dir) = images {
        let n = state.load_dir(dir).map_err(|e| fail(EXIT_INPUT, format!("reading {}: {e}", dir.display())))?;
        tracing::info!("loaded {n} image(s) from {}", dir.display());
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| fail(EXIT_FAILURE, e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| fail(EXIT_INPUT, format!("cannot bind {host}:{port}: {e}")))?;
        serve(listener, state).await.map_err(|e| fail(EXIT_FAILURE, e))
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_target(false).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Detect { image, config, out, annotate } => cmd_detect(image, config.as_deref(), out.as_deref(), annotate.as_deref()),
        Command::Fixture { text, height, out, truth, canvas_width, canvas_height, x, y, invert } => {
            cmd_fixture(text, *height, out, truth.as_deref(), (*canvas_width, *canvas_height), *x, *y, *invert)
        }
        Command::Serve { port, host, images } => cmd_serve(host, *port, images.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
