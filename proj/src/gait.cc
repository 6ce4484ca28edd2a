// Copyright 2026 The BWR Authors
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

#include "bwr/gait.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bwr {
namespace {

constexpr double kPi = std::numbers::pi;

// Returns the demeaned series; throws when it has no variation.
std::vector<double> demeaned(const std::vector<double>& s, const char* what) {
  if (s.size() < 4)
    throw std::invalid_argument(std::string(what) + ": series too short");
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  std::vector<double> out(s.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]))
      throw std::invalid_argument(std::string(what) + ": non-finite sample");
    out[i] = s[i] - mean;
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak <= 1e-12 * std::max(1.0, std::abs(mean)))
    throw std::invalid_argument(std::string(what) + ": constant series");
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void check_table(const Table& t) {
  if (t.names.size() != t.columns.size())
    throw std::invalid_argument("table has mismatched names and columns");
  for (const auto& c : t.columns)
    if (c.size() != t.rows())
      throw std::invalid_argument("table columns differ in length");
}

}  // namespace

std::vector<double> GaitTrace::angle_series(int joint) const {
  if (joint < 0 || joint >= 4) throw std::out_of_range("joint index");
  std::vector<double> out;
  out.reserve(samples.size());
  for (const GaitSample& s : samples) out.push_back(s.angles[joint]);
  return out;
}

double GaitTrace::sample_rate() const {
  if (samples.size() < 2) throw std::invalid_argument("trace too short");
  const double span = samples.back().time - samples.front().time;
  if (!(span > 0.0)) throw std::invalid_argument("trace time does not advance");
  return static_cast<double>(samples.size() - 1) / span;
}

GaitTrace record_rollout(const Agent& agent, BipedEnv& env, std::uint64_t seed,
                         int max_steps) {
  GaitTrace trace;
  Eigen::VectorXd obs = env.reset(seed);
  while (true) {
    StepResult r = env.step(policy_action(agent, obs));
    const RobotState& st = env.state();
    GaitSample s;
    s.time = r.info.sim_time;
    s.angles = st.joint_angles;
    s.velocities = st.joint_vels;
    s.waist_pos = st.waist_pos;
    s.waist_vel = st.waist_vel;
    s.contact[0] = st.foot_contact[0];
    s.contact[1] = st.foot_contact[1];
    s.reward = r.reward;
    trace.samples.push_back(s);
    obs = std::move(r.observation);
    if (r.done || (max_steps > 0 && static_cast<int>(trace.size()) >= max_steps))
      break;
  }
  return trace;
}

double average_speed(const GaitTrace& trace) {
  if (trace.empty()) throw std::invalid_argument("average_speed of an empty trace");
  const GaitSample& first = trace.samples.front();
  const GaitSample& last = trace.samples.back();
  const double duration = last.time - first.time;
  if (!(duration > 0.0))
    throw std::invalid_argument("average_speed needs a positive duration");
  return (last.waist_pos[0] - first.waist_pos[0]) / duration;
}

double dominant_frequency(const std::vector<double>& series, double sample_rate) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  std::vector<double> x = demeaned(series, "dominant_frequency");
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    x[i] *= 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(n - 1)));

  std::size_t nfft = 1;
  while (nfft < 8 * n) nfft <<= 1;
  std::vector<double> cos_table(nfft), sin_table(nfft);
  for (std::size_t i = 0; i < nfft; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(nfft);
    cos_table[i] = std::cos(a);
    sin_table[i] = std::sin(a);
  }
  auto magnitude = [&](std::size_t k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = (k * i) & (nfft - 1);
      re += x[i] * cos_table[idx];
      im -= x[i] * sin_table[idx];
    }
    return std::hypot(re, im);
  };

  // Skip the window's main lobe around DC (two bins of the unpadded grid).
  const std::size_t first = std::max<std::size_t>(1, 2 * nfft / n);
  const std::size_t last = nfft / 2 - 1;
  std::vector<double> mag(last + 2, 0.0);
  std::size_t best = first;
  for (std::size_t k = first - 1; k <= last + 1; ++k) {
    mag[k] = magnitude(k);
  }
  for (std::size_t k = first; k <= last; ++k)
    if (mag[k] > mag[best]) best = k;

  const double floor = 1e-300;
  const double a = std::log(std::max(mag[best - 1], floor));
  const double b = std::log(std::max(mag[best], floor));
  const double c = std::log(std::max(mag[best + 1], floor));
  const double denom = a - 2.0 * b + c;
  const double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
  const double freq =
      (static_cast<double>(best) + delta) * sample_rate / static_cast<double>(nfft);

  const double duration = static_cast<double>(n) / sample_rate;
  if (freq * duration < 4.0)
    throw std::invalid_argument("series spans fewer than four periods of its "
                                "dominant frequency");
  return freq;
}

double phase_difference(const std::vector<double>& a,
                        const std::vector<double>& b, double sample_rate) {
  if (a.size() != b.size())
    throw std::invalid_argument("phase_difference needs equal-length series");
  demeaned(a, "phase_difference");
  demeaned(b, "phase_difference");
  const double f = 0.5 * (dominant_frequency(a, sample_rate) +
                          dominant_frequency(b, sample_rate));
  const double period = sample_rate / f;  // samples

  // Whole periods only, so the circular wrap joins the series smoothly.
  const double whole = std::floor(static_cast<double>(a.size()) / period) * period;
  const auto n = static_cast<std::ptrdiff_t>(std::lround(whole));
  const std::vector<double> x =
      demeaned({a.begin(), a.begin() + n}, "phase_difference");
  const std::vector<double> y =
      demeaned({b.begin(), b.begin() + n}, "phase_difference");
  double sx = 0.0, sy = 0.0;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    sx += x[i] * x[i];
    sy += y[i] * y[i];
  }
  const double norm = std::sqrt(sx * sy);
  auto corr = [&](std::ptrdiff_t lag) {
    double acc = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t j = ((i + lag) % n + n) % n;
      acc += x[i] * y[j];
    }
    return acc / norm;
  };

  const auto span = static_cast<std::ptrdiff_t>(std::ceil(period));
  std::ptrdiff_t best = 0;
  double best_r = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t lag = 0; lag < span; ++lag) {
    const double r = corr(lag);
    if (r > best_r) {
      best_r = r;
      best = lag;
    }
  }
  const double rm = corr(best - 1), rp = corr(best + 1);
  const double denom = rm - 2.0 * best_r + rp;
  const double delta = denom < 0.0 ? 0.5 * (rm - rp) / denom : 0.0;

  double theta = std::fmod(2.0 * kPi * (static_cast<double>(best) + delta) / period,
                           2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  const double folded = theta <= kPi ? theta : 2.0 * kPi - theta;
  return std::clamp(folded, 0.0, kPi);
}

std::vector<double> reward_curve(const std::vector<double>& returns, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::vector<double> out;
  out.reserve(returns.size());
  for (std::size_t k = 0; k < returns.size(); ++k) {
    const std::size_t begin = k + 1 > static_cast<std::size_t>(window) ? k + 1 - window : 0;
    double sum = 0.0;
    double lo = returns[begin], hi = returns[begin];
    for (std::size_t i = begin; i <= k; ++i) {
      sum += returns[i];
      lo = std::min(lo, returns[i]);
      hi = std::max(hi, returns[i]);
    }
    out.push_back(std::clamp(sum / static_cast<double>(k + 1 - begin), lo, hi));
  }
  return out;
}

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw std::invalid_argument("missing column '" + name + "'");
}

Table trace_table(const GaitTrace& trace) {
  Table t;
  t.names = {"time",      "hip_r",     "hip_l",      "knee_r",     "knee_l",
             "hip_r_vel", "hip_l_vel", "knee_r_vel", "knee_l_vel", "waist_y",
             "waist_z",   "waist_vy",  "waist_vz",   "contact_r",  "contact_l",
             "reward"};
  t.columns.assign(t.names.size(), {});
  for (const GaitSample& s : trace.samples) {
    const double row[] = {s.time,          s.angles[0],     s.angles[1],
                          s.angles[2],     s.angles[3],     s.velocities[0],
                          s.velocities[1], s.velocities[2], s.velocities[3],
                          s.waist_pos[0],  s.waist_pos[1],  s.waist_vel[0],
                          s.waist_vel[1],  s.contact[0] ? 1.0 : 0.0,
                          s.contact[1] ? 1.0 : 0.0,         s.reward};
    for (std::size_t c = 0; c < t.names.size(); ++c) t.columns[c].push_back(row[c]);
  }
  return t;
}

GaitTrace trace_from_table(const Table& t) {
  check_table(t);
  const auto& time = t.column("time");
  const auto& hr = t.column("hip_r");
  const auto& hl = t.column("hip_l");
  const auto& kr = t.column("knee_r");
  const auto& kl = t.column("knee_l");
  GaitTrace trace;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    GaitSample s;
    s.time = time[i];
    s.angles = {hr[i], hl[i], kr[i], kl[i]};
    trace.samples.push_back(s);
  }
  auto optional = [&](const char* name, auto&& assign) {
    for (std::size_t c = 0; c < t.names.size(); ++c) {
      if (t.names[c] != name) continue;
      for (std::size_t i = 0; i < t.rows(); ++i) assign(trace.samples[i], t.columns[c][i]);
    }
  };
  optional("hip_r_vel", [](GaitSample& s, double v) { s.velocities[0] = v; });
  optional("hip_l_vel", [](GaitSample& s, double v) { s.velocities[1] = v; });
  optional("knee_r_vel", [](GaitSample& s, double v) { s.velocities[2] = v; });
  optional("knee_l_vel", [](GaitSample& s, double v) { s.velocities[3] = v; });
  optional("waist_y", [](GaitSample& s, double v) { s.waist_pos[0] = v; });
  optional("waist_z", [](GaitSample& s, double v) { s.waist_pos[1] = v; });
  optional("waist_vy", [](GaitSample& s, double v) { s.waist_vel[0] = v; });
  optional("waist_vz", [](GaitSample& s, double v) { s.waist_vel[1] = v; });
  optional("contact_r", [](GaitSample& s, double v) { s.contact[0] = v != 0.0; });
  optional("contact_l", [](GaitSample& s, double v) { s.contact[1] = v != 0.0; });
  optional("reward", [](GaitSample& s, double v) { s.reward = v; });
  return trace;
}

Table curve_table(const std::vector<double>& returns, int window) {
  Table t;
  t.names = {"episode", "return", "trailing_mean"};
  t.columns.assign(3, {});
  const std::vector<double> curve = reward_curve(returns, window);
  for (std::size_t i = 0; i < returns.size(); ++i) {
    t.columns[0].push_back(static_cast<double>(i + 1));
    t.columns[1].push_back(returns[i]);
    t.columns[2].push_back(curve[i]);
  }
  return t;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  check_table(table);
  std::string out;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    if (c) out += ',';
    out += table.names[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      out += format_number(table.columns[c][r]);
    }
    out += '\n';
  }
  write_file(path, out);
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string where = path.string() + ":";
  Table t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (t.names.empty()) {
      for (const std::string& f : fields) {
        if (f.empty())
          throw std::runtime_error(where + std::to_string(lineno) + ": empty column name");
        t.names.push_back(f);
      }
      t.columns.assign(t.names.size(), {});
      continue;
    }
    if (fields.size() != t.names.size())
      throw std::runtime_error(where + std::to_string(lineno) + ": expected " +
                               std::to_string(t.names.size()) + " fields, got " +
                               std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw std::runtime_error(where + std::to_string(lineno) + ": bad number '" +
                                 f + "' in column " + t.names[c]);
      t.columns[c].push_back(v);
    }
  }
  if (t.names.empty()) throw std::runtime_error(where + " missing header row");
  return t;
}

void write_plotdata(const Table& table, const std::filesystem::path& path) {
  check_table(table);
  std::string out = "#";
  for (const std::string& n : table.names) out += " " + n;
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ' ';
      out += format_number(table.columns[c][r]);
    }
    out += '\n';
  }
  write_file(path, out);
}

std::string render_svg(const Table& table, const SvgPlot& plot) {
  check_table(table);
  constexpr double kWidth = 720, kHeight = 420;
  constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b"};

  const std::vector<double>& xs = table.column(plot.x_column);
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) continue;
    for (const std::string& name : plot.y_columns) {
      const double y = table.column(name)[i];
      if (!std::isfinite(y)) continue;
      x0 = std::min(x0, xs[i]);
      x1 = std::max(x1, xs[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) +
       "\" height=\"" + fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) +
       " " + fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-size=\"15\">" + xml_escape(plot.title) + "</text>\n";
  s += "<rect x=\"" + fixed(kLeft, 1) + "\" y=\"" + fixed(kTop, 1) + "\" width=\"" +
       fixed(pw, 1) + "\" height=\"" + fixed(ph, 1) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    s += "<line x1=\"" + fixed(sx(fx), 2) + "\" y1=\"" + fixed(kTop + ph, 2) +
         "\" x2=\"" + fixed(sx(fx), 2) + "\" y2=\"" + fixed(kTop + ph + 5, 2) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(sx(fx), 2) + "\" y=\"" + fixed(kTop + ph + 19, 2) +
         "\" text-anchor=\"middle\">" + short_number(fx) + "</text>\n";
    s += "<line x1=\"" + fixed(kLeft - 5, 2) + "\" y1=\"" + fixed(sy(fy), 2) +
         "\" x2=\"" + fixed(kLeft, 2) + "\" y2=\"" + fixed(sy(fy), 2) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(kLeft - 8, 2) + "\" y=\"" + fixed(sy(fy) + 4, 2) +
         "\" text-anchor=\"end\">" + short_number(fy) + "</text>\n";
  }
  s += "<text x=\"" + fixed(kLeft + pw / 2, 1) + "\" y=\"" + fixed(kHeight - 12, 1) +
       "\" text-anchor=\"middle\">" + xml_escape(plot.x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fixed(kTop + ph / 2, 1) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fixed(kTop + ph / 2, 1) + ")\">" + xml_escape(plot.y_label) + "</text>\n";

  for (std::size_t k = 0; k < plot.y_columns.size(); ++k) {
    const std::vector<double>& ys = table.column(plot.y_columns[k]);
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      if (!points.empty()) points += ' ';
      points += fixed(sx(xs[i]), 2) + "," + fixed(sy(ys[i]), 2);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 12 + 18 * static_cast<double>(k);
    s += "<line x1=\"" + fixed(kLeft + pw + 12, 1) + "\" y1=\"" + fixed(ly, 1) +
         "\" x2=\"" + fixed(kLeft + pw + 32, 1) + "\" y2=\"" + fixed(ly, 1) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(kLeft + pw + 38, 1) + "\" y=\"" + fixed(ly + 4, 1) +
         "\">" + xml_escape(plot.y_columns[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

void write_svg(const Table& table, const SvgPlot& plot,
               const std::filesystem::path& path) {
  write_file(path, render_svg(table, plot));
}

}  // namespace bwr
