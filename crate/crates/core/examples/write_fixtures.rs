//! Writes the sample file set to the directory given as the first argument
//! (default `fixtures`).

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    for (rel, bytes) in densify_core::sample_data::sample_files() {
        let path = root.join(rel);
        std::fs::create_dir_all(path.parent().expect("file has a parent"))?;
        std::fs::write(&path, bytes)?;
    }
    println!("wrote {}", root.display());
    Ok(())
}
