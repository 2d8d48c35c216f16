use anyhow::Result;
use aqcast_core::models::{ModelKind, ModelSpec, Network};
use aqcast_core::nn::Parameters;
use clap::Args;

#[derive(Debug, Args)]
pub struct DescribeArgs {
    /// Model kind; repeat for several. Defaults to all four.
    #[arg(long)]
    pub model: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub lookback: usize,
    /// Input features per step (11 multivariate, 1 univariate).
    #[arg(long, default_value_t = 11)]
    pub features: usize,
    #[arg(long, default_value_t = 10)]
    pub horizon: usize,
}

pub fn run(args: &DescribeArgs) -> Result<()> {
    let kinds: Vec<ModelKind> = if args.model.is_empty() {
        ModelKind::ALL.to_vec()
    } else {
        args.model.iter().map(|m| m.parse()).collect::<aqcast_core::Result<_>>()?
    };
    for (k, kind) in kinds.into_iter().enumerate() {
        let spec = ModelSpec::new(kind, args.lookback, args.features, args.horizon);
        let net = Network::build(&spec, 0)?;
        if k > 0 {
            println!();
        }
        println!(
            "{kind}: lookback {}, features {}, horizon {}, input width {}, {} parameters",
            spec.lookback,
            spec.input_features,
            spec.horizon,
            spec.input_width(),
            net.param_count()
        );
        println!("  {:<14} {:>7} {:>8} {:>8}  detail", "layer", "inputs", "outputs", "params");
        for layer in net.describe(&spec) {
            println!(
                "  {:<14} {:>7} {:>8} {:>8}  {}",
                layer.name, layer.inputs, layer.outputs, layer.params, layer.detail
            );
        }
    }
    Ok(())
}
