//! Encode a few flow fields to the binary stream format and read them back.

use egoflow::{decode_mv_stream, encode_mv_stream, FlowField, MotionVector};

fn main() -> egoflow::Result<()> {
    let fields: Vec<FlowField> = (0..3)
        .map(|i| {
            let vectors = (0..4 * 3).map(|k| MotionVector::new(2 * i - k % 3, -4, 100 * k as u32)).collect();
            FlowField::new(i as u32, i as f64 / 30.0, 4, 3, 16, vectors)
        })
        .collect::<Result<_, _>>()?;

    let bytes = encode_mv_stream(&fields)?;
    println!("{} frames -> {} bytes", fields.len(), bytes.len());
    println!("first record: {:02X?}", &bytes[24..28]);

    // drop the last 10 bytes: the partial frame is reported, not an error
    let cut = decode_mv_stream(&bytes[..bytes.len() - 10])?;
    println!(
        "truncated copy: {} complete frames, truncated = {}",
        cut.fields.len(),
        cut.truncated
    );

    assert_eq!(decode_mv_stream(&bytes)?.fields, fields);
    Ok(())
}
