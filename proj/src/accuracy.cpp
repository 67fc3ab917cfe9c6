// Copyright 2026 The amla-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include "amla/attention.hpp"
#include "amla/rng.hpp"

namespace amla {
namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

Matrix fill_bf16(Rng& rng, Index rows, Index cols,
                 const DistributionSpec& dist) {
  Matrix m(rows, cols);
  const float sigma =
      static_cast<float>(std::sqrt(std::max(dist.param_a, 0.0)));
  for (Index r = 0; r < rows; ++r)
    for (Index j = 0; j < cols; ++j)
      m(r, j) = dist.kind == DistributionSpec::Kind::kGaussian
                    ? rng.gaussian(sigma)
                    : rng.uniform(static_cast<float>(dist.param_a),
                                  static_cast<float>(dist.param_b));
  return round_to_bf16(m);
}

void finalize_stats(MethodStats& s) {
  s.min = std::numeric_limits<double>::infinity();
  s.max = -s.min;
  double acc = 0.0;
  for (double v : s.samples) {
    acc += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean =
      s.samples.empty() ? 0.0 : acc / static_cast<double>(s.samples.size());
}

}  // namespace

DistributionSpec DistributionSpec::parse(const std::string& text) {
  DistributionSpec d;
  const auto fail = [&] {
    throw std::invalid_argument("bad distribution spec: " + text);
  };
  const auto p1 = text.find(':');
  if (p1 == std::string::npos) fail();
  const std::string kind = text.substr(0, p1);
  const std::string rest = text.substr(p1 + 1);
  try {
    if (kind == "gaussian") {
      d.kind = Kind::kGaussian;
      size_t used = 0;
      d.param_a = std::stod(rest, &used);
      if (used != rest.size() || d.param_a <= 0.0) fail();
    } else if (kind == "uniform") {
      d.kind = Kind::kUniform;
      const auto p2 = rest.find(':');
      if (p2 == std::string::npos) fail();
      size_t ua = 0, ub = 0;
      const std::string lo = rest.substr(0, p2), hi = rest.substr(p2 + 1);
      d.param_a = std::stod(lo, &ua);
      d.param_b = std::stod(hi, &ub);
      if (ua != lo.size() || ub != hi.size() || d.param_b <= d.param_a) fail();
    } else {
      fail();
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    fail();
  }
  return d;
}

std::string DistributionSpec::label() const {
  if (kind == Kind::kGaussian) return "gaussian:" + fmt_g(param_a);
  return "uniform:" + fmt_g(param_a) + ":" + fmt_g(param_b);
}

std::vector<DistributionSpec> standard_distributions() {
  std::vector<DistributionSpec> out;
  for (double var : {1.0, 4.0, 9.0, 16.0, 25.0, 100.0}) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::kGaussian;
    d.param_a = var;
    out.push_back(d);
  }
  for (double a : {1.0, 3.0, 5.0, 10.0, 20.0, 60.0}) {
    DistributionSpec d;
    d.kind = DistributionSpec::Kind::kUniform;
    d.param_a = -a;
    d.param_b = a;
    out.push_back(d);
  }
  return out;
}

Matrix draw_bf16_matrix(Index rows, Index cols, const DistributionSpec& dist,
                        uint32_t seed) {
  Rng rng(seed);
  return fill_bf16(rng, rows, cols, dist);
}

AccuracyReport run_accuracy_suite(const std::vector<DistributionSpec>& dists,
                                  const AttentionConfig& cfg, int n_samples,
                                  int n_threads, RescaleCompensation comp) {
  cfg.validate();
  if (n_samples <= 0)
    throw std::invalid_argument("n_samples must be positive");
  AccuracyReport report;
  report.config = cfg;
  report.n_samples = n_samples;
  report.compensation = comp;
  report.results.resize(dists.size());
  for (size_t d = 0; d < dists.size(); ++d) {
    report.results[d].dist = dists[d];
    report.results[d].base.samples.resize(n_samples);
    report.results[d].amla.samples.resize(n_samples);
  }

  struct Job {
    size_t dist;
    int sample;
  };
  std::vector<Job> jobs;
  for (size_t d = 0; d < dists.size(); ++d)
    for (int s = 0; s < n_samples; ++s) jobs.push_back({d, s});

  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job job = jobs[i];
      Rng rng(
          derive_seed(cfg.seed, job.dist, static_cast<uint64_t>(job.sample)));
      const DistributionSpec& dist = dists[job.dist];
      const Matrix q = fill_bf16(rng, cfg.g, cfg.dk, dist);
      const Matrix k = fill_bf16(rng, cfg.s2, cfg.dk, dist);
      const Matrix v = fill_bf16(rng, cfg.s2, cfg.dv, dist);
      const Matrix gold = golden_attention(q, k, v);
      // Both blocked pipelines ship their output in BF16, so the error is
      // measured on the BF16-rounded result. The reference stays FP32.
      const Matrix base = round_to_bf16(base_attention(q, k, v, cfg));
      AmlaOptions opts;
      opts.compensation = comp;
      const Matrix fused =
          round_to_bf16(amla_attention(q, k, v, cfg, opts).first);
      report.results[job.dist].base.samples[job.sample] =
          rel_frobenius_error(base, gold);
      report.results[job.dist].amla.samples[job.sample] =
          rel_frobenius_error(fused, gold);
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& r : report.results) {
    finalize_stats(r.base);
    finalize_stats(r.amla);
  }
  return report;
}

}  // namespace amla
