//! Model checkpoints: the flat parameter file plus a spec, seed and scaler
//! header.
//!
//! ```text
//! aqcast-checkpoint 1
//! kind BDLSTM
//! lookback 5
//! features 11
//! horizon 10
//! hidden 50
//! activation relu
//! seed 7
//! scaler PM2.5 3.54 907
//! params 25810
//! ...
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::nn::{read_checkpoint, write_checkpoint, Activation, Parameters};
use crate::station::ScalerParams;

use super::network::Network;
use super::spec::ModelSpec;
use super::train::TrainedModel;

pub fn save_model<W: Write>(model: &TrainedModel, sink: W) -> Result<()> {
    let spec = &model.spec;
    let mut header = vec![
        ("kind".to_string(), spec.kind.name().to_string()),
        ("lookback".into(), spec.lookback.to_string()),
        ("features".into(), spec.input_features.to_string()),
        ("horizon".into(), spec.horizon.to_string()),
        (
            "hidden".into(),
            spec.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(" "),
        ),
        (
            "activation".into(),
            match spec.hidden_activation {
                Activation::Relu => "relu".into(),
                Activation::Identity => "identity".into(),
            },
        ),
        ("seed".into(), model.seed.to_string()),
    ];
    if let Some(scaler) = &model.scaler {
        for (i, name) in scaler.feature_names.iter().enumerate() {
            if name.contains(char::is_whitespace) {
                return Err(Error::Checkpoint(format!("feature name {name:?} contains whitespace")));
            }
            header.push(("scaler".into(), format!("{name} {} {}", scaler.min[i], scaler.max[i])));
        }
    }
    write_checkpoint(sink, &header, &model.network.to_flat())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Checkpoint(format!("bad value for {key}: {value:?}")))
}

pub fn load_model<R: BufRead>(source: R) -> Result<TrainedModel> {
    let (header, params) = read_checkpoint(source)?;
    let get = |key: &str| {
        header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Checkpoint(format!("missing header {key}")))
    };
    let kind = get("kind")?.parse().map_err(|e: Error| Error::Checkpoint(e.to_string()))?;
    let mut spec = ModelSpec::new(
        kind,
        parse("lookback", get("lookback")?)?,
        parse("features", get("features")?)?,
        parse("horizon", get("horizon")?)?,
    );
    spec.hidden = get("hidden")?
        .split_whitespace()
        .map(|h| parse("hidden", h))
        .collect::<Result<_>>()?;
    spec.hidden_activation = match get("activation")? {
        "relu" => Activation::Relu,
        "identity" => Activation::Identity,
        other => return Err(Error::Checkpoint(format!("unknown activation {other:?}"))),
    };
    let seed = parse("seed", get("seed")?)?;

    let mut names = Vec::new();
    let (mut min, mut max) = (Vec::new(), Vec::new());
    for (_, value) in header.iter().filter(|(k, _)| k == "scaler") {
        let parts: Vec<&str> = value.split_whitespace().collect();
        let [name, lo, hi] = parts.as_slice() else {
            return Err(Error::Checkpoint(format!("bad scaler line {value:?}")));
        };
        names.push(name.to_string());
        min.push(parse("scaler", lo)?);
        max.push(parse("scaler", hi)?);
    }
    let scaler = if names.is_empty() { None } else { Some(ScalerParams::new(names, min, max)?) };

    let mut network = Network::build(&spec, seed)?;
    network
        .assign_flat(&params)
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(TrainedModel { spec, network, scaler, loss_history: Vec::new(), seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelKind};

    #[test]
    fn save_load_is_value_exact() {
        for kind in ModelKind::ALL {
            let spec = ModelSpec::new(kind, 5, 11, 10);
            let scaler = ScalerParams::new(vec!["PM2.5".into(), "NO".into()], vec![3.54, 0.1], vec![907.0, 440.74]).unwrap();
            let model = build_model(&spec, 77).unwrap().with_scaler(scaler);
            let mut buf = Vec::new();
            save_model(&model, &mut buf).unwrap();
            let loaded = load_model(buf.as_slice()).unwrap();
            assert_eq!(loaded.spec, model.spec);
            assert_eq!(loaded.scaler, model.scaler);
            assert_eq!(loaded.seed, 77);
            let a: Vec<u64> = model.network.to_flat().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = loaded.network.to_flat().iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wrong_parameter_count_rejected() {
        let text = "aqcast-checkpoint 1\nkind LSTM\nlookback 5\nfeatures 1\nhorizon 10\nhidden 2\nactivation relu\nseed 0\nparams 1\n0.5\n";
        assert!(matches!(load_model(text.as_bytes()), Err(Error::Checkpoint(_))));
    }
}
