use serde_json::{json, Value};

use crate::model::DiseaseProfile;

pub const PRESET_NAMES: [&str; 12] = [
    "malignant",
    "moderate",
    "general",
    "passive-quarantine",
    "active-quarantine",
    "green-code",
    "green-code-overall",
    "asymptomatic",
    "vaccination",
    "masks-medical",
    "masks-general",
    "community",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESET_NAMES
}

fn disease(d: DiseaseProfile) -> Value {
    serde_json::to_value(d).expect("disease serializes")
}

fn with_policy(policy: Value) -> Value {
    json!({ "disease": disease(DiseaseProfile::MODERATE), "policy": policy })
}

const DIAGNOSIS: f64 = 0.3;

/// Configuration fragment of a named scenario.
pub fn preset(name: &str) -> Option<Value> {
    let passive = json!({ "probability": DIAGNOSIS });
    let overall = json!({ "period": 5, "recall": 0.9 });
    let fragment = match name {
        "malignant" => json!({ "disease": disease(DiseaseProfile::MALIGNANT) }),
        "moderate" => json!({ "disease": disease(DiseaseProfile::MODERATE) }),
        "general" => json!({ "disease": disease(DiseaseProfile::GENERAL) }),
        "passive-quarantine" => with_policy(json!({ "passive_diagnosis": passive })),
        "active-quarantine" => with_policy(json!({ "overall_detection": overall })),
        "green-code" => with_policy(json!({ "passive_diagnosis": passive, "green_code": true })),
        "green-code-overall" => with_policy(json!({
            "passive_diagnosis": passive,
            "overall_detection": overall,
            "green_code": true,
        })),
        "asymptomatic" => with_policy(json!({
            "passive_diagnosis": passive,
            "overall_detection": overall,
            "green_code": true,
            "asymptomatic_fraction": 0.1,
        })),
        "vaccination" => with_policy(json!({
            "vaccination": { "coverage": 1.0, "recover_factor": 0.7 },
        })),
        "masks-medical" => with_policy(json!({ "masks": { "edge_factor": 0.9 } })),
        "masks-general" => with_policy(json!({ "masks": { "edge_factor": 0.95 } })),
        "community" => json!({
            "disease": disease(DiseaseProfile::MODERATE),
            "network": {
                "population": 2000,
                "community": { "community_size": 100, "inter_community_links": 1 },
            },
        }),
        _ => return None,
    };
    Some(fragment)
}
