#include "mbti/report.hpp"

#include <cstdio>

namespace mbti {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string row(std::initializer_list<std::string> cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string rule(std::size_t n) {
  std::string out = "|";
  for (std::size_t i = 0; i < n; ++i) out += "---|";
  return out + "\n";
}

}  // namespace

std::string plain_decimal(double v) {
  std::string s = fixed(v, 12);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

std::string grid_markdown(std::span<const GridRow> rows) {
  std::string out = "## Hyperparameter grid\n\n";
  out += row({"Learn. Rate", "Max Seq.", "Epochs", "Acc."});
  out += rule(4);
  for (const auto& r : rows) {
    out += row({plain_decimal(r.hyperparams.learning_rate), std::to_string(r.hyperparams.max_seq_len),
                std::to_string(r.hyperparams.epochs), fixed(r.exact_accuracy, 4)});
  }
  return out;
}

std::string grid_csv(std::span<const GridRow> rows) {
  std::string out = "learning_rate,max_seq_len,epochs,accuracy\n";
  for (const auto& r : rows) {
    out += plain_decimal(r.hyperparams.learning_rate) + "," + std::to_string(r.hyperparams.max_seq_len) +
           "," + std::to_string(r.hyperparams.epochs) + "," + fixed(r.exact_accuracy, 6) + "\n";
  }
  return out;
}

std::string metrics_markdown(const MetricsReport& m) {
  std::string out = "## Number of correctly predicted letters\n\n";
  out += row({"At least 1 match", "At least 2 matches", "At least 3 matches", "At least 4 matches"});
  out += rule(4);
  out += row({fixed(m.at_least_k[0], 4), fixed(m.at_least_k[1], 4), fixed(m.at_least_k[2], 4),
              fixed(m.at_least_k[3], 4)});
  out += "\n## Accuracy per axis\n\n";
  out += row({"E/I", "N/S", "F/T", "P/J"});
  out += rule(4);
  out += row({fixed(m.axis_accuracy[0], 4), fixed(m.axis_accuracy[1], 4), fixed(m.axis_accuracy[2], 4),
              fixed(m.axis_accuracy[3], 4)});
  out += "\nExact accuracy " + fixed(m.exact_accuracy, 4) + ", expected correct letters " +
         fixed(m.expected_matches, 4) + " over " + std::to_string(m.n_records) + " posts.\n";
  return out;
}

std::string metrics_csv(const MetricsReport& m) {
  std::string out = "metric,value\n";
  for (int k = 0; k < 4; ++k) {
    out += "at_least_" + std::to_string(k + 1) + "," + fixed(m.at_least_k[k], 6) + "\n";
  }
  for (std::size_t a = 0; a < 4; ++a) {
    out += "axis_" + kAxes[a].label() + "," + fixed(m.axis_accuracy[a], 6) + "\n";
  }
  out += "exact_accuracy," + fixed(m.exact_accuracy, 6) + "\n";
  out += "expected_matches," + fixed(m.expected_matches, 6) + "\n";
  out += "n_records," + std::to_string(m.n_records) + "\n";
  return out;
}

std::string loss_markdown(const LossTable& t) {
  std::string out = "## Language generation losses\n\n";
  out += row({"Type", "Loss", "Type", "Loss"});
  out += rule(4);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& e = t.rows[i];
    const auto& in = t.rows[i + 8];
    out += row({e.type.str(), fixed(e.final_loss, 6), in.type.str(), fixed(in.final_loss, 6)});
  }
  out += "\nMean loss: E types " + fixed(t.extravert_mean, 6) + ", I types " + fixed(t.introvert_mean, 6) +
         ".\n\nPosts per type: ";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out += (i ? ", " : "") + t.rows[i].type.str() + " " + std::to_string(t.rows[i].corpus_size);
  }
  return out + ".\n";
}

std::string loss_csv(const LossTable& t) {
  std::string out = "type,loss,corpus_size\n";
  for (const auto& r : t.rows) {
    out += r.type.str() + "," + fixed(r.final_loss, 6) + "," + std::to_string(r.corpus_size) + "\n";
  }
  return out;
}

std::string provenance_markdown(const Provenance& p) {
  std::string out = "---\n\nConfig sha256 `" + p.config_hash + "`.";
  if (!p.seeds.empty()) {
    out += " Seeds:";
    for (std::size_t i = 0; i < p.seeds.size(); ++i) {
      out += (i ? ", " : " ") + p.seeds[i].first + "=" + std::to_string(p.seeds[i].second);
    }
    out += ".";
  }
  out += "\n";
  for (const auto& [name, hash] : p.inputs) out += "\n- " + name + " sha256 `" + hash + "`";
  if (!p.inputs.empty()) out += "\n";
  return out;
}

RenderedReport emit_report(const ReportInputs& in) {
  RenderedReport out;
  out.markdown = "# MBTI experiment report\n\n";
  if (in.grid) {
    out.markdown += grid_markdown(*in.grid) + "\n";
    out.csv["grid.csv"] = grid_csv(*in.grid);
  }
  if (in.metrics) {
    out.markdown += metrics_markdown(*in.metrics) + "\n";
    out.csv["metrics.csv"] = metrics_csv(*in.metrics);
  }
  if (in.losses) {
    out.markdown += loss_markdown(*in.losses) + "\n";
    out.csv["lm_losses.csv"] = loss_csv(*in.losses);
  }
  out.markdown += provenance_markdown(in.provenance);
  return out;
}

}  // namespace mbti
