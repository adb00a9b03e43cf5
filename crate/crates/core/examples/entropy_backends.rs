// Compare the Deflate and LZMA backends across levels on the same bytes.

use lizip::{entropy, Backend};

fn main() -> lizip::Result<()> {
    let mut plain = Vec::new();
    for i in 0u32..50_000 {
        plain.extend_from_slice(&(i / 7).to_le_bytes());
    }
    for backend in Backend::ALL {
        if !backend.is_available() {
            println!("{backend}: not compiled in");
            continue;
        }
        for level in [0, backend.default_level(), backend.max_level()] {
            let packed = entropy::compress(backend, &plain, level)?;
            assert_eq!(entropy::decompress(backend, &packed)?, plain);
            println!("{backend:<8} level {level}: {} -> {} bytes", plain.len(), packed.len());
        }
    }
    Ok(())
}
