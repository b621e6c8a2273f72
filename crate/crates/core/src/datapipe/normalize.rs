use super::BearingRecord;

/// Per-channel z-score over every acquisition of one bearing (population
/// standard deviation). A constant channel is only centred.
pub fn normalize(mut record: BearingRecord) -> BearingRecord {
    let s = record.points;
    let count = (record.len() * s) as f64;
    if count == 0.0 {
        return record;
    }
    for ch in 0..2 {
        let span = ch * s..(ch + 1) * s;
        let mean = record
            .acquisitions
            .iter()
            .map(|a| a[span.clone()].iter().sum::<f64>())
            .sum::<f64>()
            / count;
        let var = record
            .acquisitions
            .iter()
            .map(|a| a[span.clone()].iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
            .sum::<f64>()
            / count;
        let std = var.sqrt();
        for a in &mut record.acquisitions {
            for v in &mut a[span.clone()] {
                *v -= mean;
                if std > 0.0 {
                    *v /= std;
                }
            }
        }
    }
    record
}
