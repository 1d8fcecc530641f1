#include "occlusym/block.hpp"

#include "occlusym/error.hpp"

namespace occlusym {

BlockParams make_block(const BlockConfig& cfg, Rng& rng) {
  BlockParams p;
  p.norm_self = make_layer_norm(cfg.width);
  p.norm_cross = make_layer_norm(cfg.width);
  p.norm_occ = make_layer_norm(cfg.width);
  p.norm_mlp = make_layer_norm(cfg.width);
  p.time_embed = make_linear(cfg.time_dim, cfg.width, rng, 0.1);
  p.self_attn = make_attention(cfg.width, cfg.width, cfg.heads, cfg.head_dim, rng, 0.5);
  p.cross_attn = make_attention(cfg.width, cfg.cond_width, cfg.heads, cfg.head_dim, rng, 0.5);
  p.occ_attn = make_attention(cfg.width, cfg.occ_width, cfg.heads, cfg.head_dim, rng, 0.5);
  p.mlp = make_mlp(cfg.width, cfg.mlp_hidden, rng, 0.5);
  return p;
}

Mat block_forward(const Mat& latents, const BlockConditioning& cond, double t, const BlockParams& p,
                  BlockCache* cache) {
  const int time_dim = static_cast<int>(p.time_embed.w.rows());
  RowVec temb = timestep_embedding(t, time_dim);
  const Mat shift = linear_forward(Mat(temb), p.time_embed);

  LayerNormCache* ln_self = cache ? &cache->ln_self : nullptr;
  Mat a = layer_norm_forward(latents, p.norm_self, ln_self);
  a.rowwise() += shift.row(0);
  Mat h = latents + self_attention(a, p.self_attn, cache ? &cache->self_attn : nullptr);

  Mat b = layer_norm_forward(h, p.norm_cross, cache ? &cache->ln_cross : nullptr);
  if (cond.c_vis.size() != cond.cond.rows()) throw ShapeError("block_forward: c_vis length != cond rows");
  h += attention_forward(b, cond.cond, &cond.c_vis, p.cross_attn, cache ? &cache->cross_attn : nullptr);

  Mat c = layer_norm_forward(h, p.norm_occ, cache ? &cache->ln_occ : nullptr);
  h += occlusion_aware_attention(c, cond.occ_stack, p.occ_attn, cache ? &cache->occ_attn : nullptr);

  Mat d = layer_norm_forward(h, p.norm_mlp, cache ? &cache->ln_mlp : nullptr);
  h += mlp_forward(d, p.mlp, cache ? &cache->mlp : nullptr);

  if (cache) cache->temb = std::move(temb);
  return h;
}

BlockInputGrads block_backward(const Mat& dy, const BlockCache& cache, const BlockParams& p, BlockParams& grad) {
  // dy flows unchanged along the residual stream; each branch adds its part.
  Mat dh = dy;
  {
    const Mat dd = mlp_backward(dh, cache.mlp, p.mlp, grad.mlp);
    dh += layer_norm_backward(dd, cache.ln_mlp, p.norm_mlp, grad.norm_mlp);
  }
  BlockInputGrads out;
  {
    const auto g = attention_backward(dh, cache.occ_attn, p.occ_attn, grad.occ_attn);
    dh += layer_norm_backward(g.dx, cache.ln_occ, p.norm_occ, grad.norm_occ);
    out.docc_stack = g.dcontext;
  }
  {
    const auto g = attention_backward(dh, cache.cross_attn, p.cross_attn, grad.cross_attn);
    dh += layer_norm_backward(g.dx, cache.ln_cross, p.norm_cross, grad.norm_cross);
    out.dcond = g.dcontext;
  }
  {
    const auto g = attention_backward(dh, cache.self_attn, p.self_attn, grad.self_attn);
    const Mat da = g.dx + g.dcontext;
    // The time shift is broadcast over rows.
    const Mat dshift = da.colwise().sum();
    linear_backward(dshift, Mat(cache.temb), p.time_embed, grad.time_embed);
    dh += layer_norm_backward(da, cache.ln_self, p.norm_self, grad.norm_self);
  }
  out.dlatents = std::move(dh);
  return out;
}

}  // namespace occlusym
