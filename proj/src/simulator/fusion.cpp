#include "procnet/fusion.hpp"

#include <algorithm>
#include <string>

namespace procnet {

FusionCenter::FusionCenter(const SystemModel& model, const FusionModel& fusion, Step horizon)
    : model_(model), fusion_(fusion), horizon_(horizon) {
  if (horizon <= 0) throw std::invalid_argument("fusion center: horizon must be positive");
  const auto len = static_cast<std::size_t>(horizon) + 1;
  const Matrix zero = Matrix::Zero(model.n, model.n);
  prior_.assign(len, zero);
  information_.assign(len, zero);
  has_information_.assign(len, 0);
  prior_[0] = model.P0;
  current_ = model.P0;
}

const Matrix* FusionCenter::information_of(const Matrix& noise) {
  for (const auto& [key, inv] : inverse_cache_) {
    if (key == &noise) return &inv;
  }
  inverse_cache_.emplace_back(&noise, spd_inverse(noise, "measurement noise covariance V"));
  return &inverse_cache_.back().second;
}

void FusionCenter::receive(const Measurement& m) {
  if (m.reception_time < next_) {
    throw std::invalid_argument("fusion center: measurement received at step " + std::to_string(m.reception_time) +
                                " arrives after that step was processed");
  }
  if (m.sample_time < 0 || m.sample_time > m.reception_time) {
    throw std::invalid_argument("fusion center: sample time must lie in [0, reception time]");
  }
  pending_.push_back(Pending{m.reception_time, m.sample_time, information_of(m.noise_cov.get())});
}

void FusionCenter::start_cycle(Step t) {
  batch_.clear();
  auto split = std::stable_partition(pending_.begin(), pending_.end(),
                                     [t](const Pending& p) { return p.reception > t; });
  batch_.assign(split, pending_.end());
  pending_.erase(split, pending_.end());
  if (batch_.empty()) return;
  busy_ = true;
  completion_ = t + fusion_.delay(batch_.size());
  cycles_.push_back(Cycle{t, completion_, batch_.size()});
}

void FusionCenter::complete_cycle(Step t) {
  busy_ = false;
  Step replay_from = valid_upto_;
  for (const auto& p : batch_) {
    const auto k = static_cast<std::size_t>(p.sample);
    information_[k] += *p.information;
    has_information_[k] = 1;
    replay_from = std::min(replay_from, p.sample);
  }
  fused_count_ += batch_.size();
  batch_.clear();

  Matrix p = prior_[static_cast<std::size_t>(replay_from)];
  for (Step k = replay_from;; ++k) {
    const auto i = static_cast<std::size_t>(k);
    prior_[i] = p;
    if (has_information_[i]) p = information_update(p, information_[i]);
    if (k == t) break;
    p = predict_step(model_, p, k);
  }
  valid_upto_ = t;
  current_ = p;
}

const Matrix& FusionCenter::step() {
  const Step t = next_;
  if (t >= horizon_) throw std::out_of_range("fusion center: stepped past the horizon");
  if (t > 0) current_ = predict_step(model_, current_, t - 1);

  if (busy_ && completion_ == t) complete_cycle(t);
  if (!busy_) {
    start_cycle(t);
    if (busy_ && completion_ == t) complete_cycle(t);
  }
  ++next_;
  return current_;
}

std::vector<double> run_fusion_loop(std::span<const Measurement> received, const FusionModel& fusion,
                                    const SystemModel& model, Step horizon) {
  for (std::size_t i = 1; i < received.size(); ++i) {
    if (received[i].reception_time < received[i - 1].reception_time) {
      throw std::invalid_argument("run_fusion_loop: stream is not sorted by reception time");
    }
  }
  FusionCenter center(model, fusion, horizon);
  std::vector<double> traces;
  traces.reserve(static_cast<std::size_t>(horizon));
  std::size_t next = 0;
  for (Step t = 0; t < horizon; ++t) {
    while (next < received.size() && received[next].reception_time <= t) center.receive(received[next++]);
    traces.push_back(center.step().trace());
  }
  return traces;
}

}  // namespace procnet
