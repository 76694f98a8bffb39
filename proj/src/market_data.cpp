// Copyright 2026 The QA3C Authors
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
#include "qa3c/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "qa3c/errors.hpp"

namespace qa3c::market {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' ||
                          s.back() == '\t' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <class T> bool parse_number(std::string_view s, T &out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Iterates non-empty lines, checking the header. Calls fn(line_no, fields).
template <class Fn>
void for_each_record(std::string_view text, const std::string &source,
                     std::string_view header, std::size_t n_fields, Fn &&fn) {
    std::size_t line_no = 0;
    bool seen_header = false;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        auto line = trim(text.substr(start, end == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : end - start));
        ++line_no;
        if (!line.empty()) {
            if (!seen_header) {
                if (line.starts_with("\xEF\xBB\xBF"))
                    line.remove_prefix(3);
                if (line != header)
                    throw ParseError(source, line_no,
                                     "expected header '" + std::string(header) +
                                         "'");
                seen_header = true;
            } else {
                auto fields = split(line, ',');
                if (fields.size() != n_fields)
                    throw ParseError(source, line_no,
                                     fmt::format("expected {} fields, got {}",
                                                 n_fields, fields.size()));
                fn(line_no, fields);
            }
        }
        if (end == std::string_view::npos)
            break;
        start = end + 1;
    }
    if (!seen_header)
        throw ParseError(source, 0, "empty file");
}

double parse_close(std::string_view field, const std::string &source,
                   std::size_t line_no) {
    double close = 0.0;
    if (!parse_number(field, close))
        throw ParseError(source, line_no,
                         "invalid close '" + std::string(field) + "'");
    if (!std::isfinite(close) || close <= 0.0)
        throw DataValidationError(fmt::format(
            "{}:{}: close must be positive, got {}", source, line_no, close));
    return close;
}

Date parse_date_at(std::string_view field, const std::string &source,
                   std::size_t line_no) {
    try {
        return parse_date(field);
    } catch (const std::invalid_argument &e) {
        throw ParseError(source, line_no, e.what());
    }
}

} // namespace

std::string YearMonth::to_string() const {
    return fmt::format("{:04d}-{:02d}", year, month);
}

YearMonth YearMonth::of(const Date &d) {
    return {static_cast<int>(d.year()), static_cast<unsigned>(d.month())};
}

YearMonth YearMonth::parse(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned m = 0;
    if (text.size() != 7 || text[4] != '-' ||
        !parse_number(text.substr(0, 4), y) ||
        !parse_number(text.substr(5, 2), m) || m < 1 || m > 12)
        throw std::invalid_argument("invalid month '" + std::string(text) +
                                    "', expected YYYY-MM");
    return {y, m};
}

Date parse_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !parse_number(text.substr(0, 4), y) ||
        !parse_number(text.substr(5, 2), m) ||
        !parse_number(text.substr(8, 2), d))
        throw std::invalid_argument("invalid date '" + std::string(text) +
                                    "', expected YYYY-MM-DD");
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok())
        throw std::invalid_argument("invalid date '" + std::string(text) + "'");
    return date;
}

std::string format_date(const Date &d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                       static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

PricePanel load_prices(const std::filesystem::path &path) {
    return parse_prices(read_file(path), path.string());
}

PricePanel parse_prices(std::string_view text, const std::string &source) {
    struct Record {
        Date date;
        std::string ticker;
        double close;
        std::size_t line;
    };
    std::vector<Record> records;
    for_each_record(text, source, "date,ticker,close", 3,
                    [&](std::size_t line_no, const auto &f) {
                        if (f[1].empty())
                            throw ParseError(source, line_no, "empty ticker");
                        records.push_back({parse_date_at(f[0], source, line_no),
                                           std::string(f[1]),
                                           parse_close(f[2], source, line_no),
                                           line_no});
                    });

    std::set<Date> date_set;
    std::set<std::string> ticker_set;
    for (const auto &r : records) {
        date_set.insert(r.date);
        ticker_set.insert(r.ticker);
    }
    if (date_set.size() < 2)
        throw InsufficientDataError(source + ": need at least 2 dates");

    PricePanel panel;
    panel.dates.assign(date_set.begin(), date_set.end());
    panel.tickers.assign(ticker_set.begin(), ticker_set.end());
    std::map<Date, std::size_t> row_of;
    for (std::size_t i = 0; i < panel.dates.size(); ++i)
        row_of[panel.dates[i]] = i;
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t j = 0; j < panel.tickers.size(); ++j)
        col_of[panel.tickers[j]] = j;

    panel.closes = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(panel.dates.size()),
        static_cast<Eigen::Index>(panel.tickers.size()), kNaN);
    for (const auto &r : records) {
        auto &cell = panel.closes(static_cast<Eigen::Index>(row_of[r.date]),
                                  static_cast<Eigen::Index>(col_of[r.ticker]));
        if (!std::isnan(cell))
            throw DataValidationError(fmt::format(
                "{}:{}: duplicate close for ({}, {})", source, r.line,
                format_date(r.date), r.ticker));
        cell = r.close;
    }
    return panel;
}

void write_prices(const std::filesystem::path &path, const PricePanel &panel) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << "date,ticker,close\n";
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        const auto date = format_date(panel.dates[t]);
        for (std::size_t j = 0; j < panel.n_tickers(); ++j) {
            double c = panel.closes(static_cast<Eigen::Index>(t),
                                    static_cast<Eigen::Index>(j));
            if (std::isnan(c))
                continue;
            out << fmt::format("{},{},{}\n", date, panel.tickers[j], c);
        }
    }
    if (!out)
        throw DataError("write failed: " + path.string());
}

ReturnPanel compute_returns(const PricePanel &prices) {
    if (prices.n_dates() < 2)
        throw InsufficientDataError("compute_returns: need at least 2 dates");
    const auto rows = static_cast<Eigen::Index>(prices.n_dates() - 1);
    ReturnPanel out;
    out.base_date = prices.dates.front();
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.tickers = prices.tickers;
    out.returns = prices.closes.bottomRows(rows).array() /
                      prices.closes.topRows(rows).array() -
                  1.0;
    return out;
}

double compound(const Eigen::Ref<const Eigen::VectorXd> &r,
                std::size_t end_index, std::size_t count) {
    double growth = 1.0;
    for (std::size_t k = end_index + 1 - count; k <= end_index; ++k)
        growth *= 1.0 + r(static_cast<Eigen::Index>(k));
    return growth - 1.0;
}

StockFeatures window_features(const ReturnPanel &returns, std::size_t end_index,
                              std::size_t ticker) {
    if (end_index + 1 < kLongWindow || end_index >= returns.n_dates())
        throw InsufficientDataError(fmt::format(
            "window_features: end_index {} needs {} prior rows of {}",
            end_index, kLongWindow, returns.n_dates()));
    if (ticker >= returns.n_tickers())
        throw ContractViolation("window_features: ticker index out of range");

    const Eigen::VectorXd col =
        returns.returns.col(static_cast<Eigen::Index>(ticker));
    const auto first = static_cast<Eigen::Index>(end_index + 1 - kLongWindow);
    const auto window = col.segment(first, kLongWindow);
    if (!window.allFinite())
        throw InsufficientDataError("window_features: missing returns for " +
                                    returns.tickers[ticker]);

    StockFeatures f;
    f.m5 = compound(col, end_index, kShortWindow);
    f.m20 = compound(col, end_index, kLongWindow);
    const double mean = window.mean();
    const double ss = (window.array() - mean).square().sum();
    f.v20 = std::sqrt(ss / static_cast<double>(kLongWindow - 1));
    return f;
}

FeatureMatrix feature_matrix(const ReturnPanel &returns, std::size_t end_index,
                             std::size_t coverage_window) {
    coverage_window = std::max(coverage_window, kLongWindow);
    if (end_index + 1 < coverage_window || end_index >= returns.n_dates())
        throw InsufficientDataError(fmt::format(
            "feature_matrix: end_index {} needs {} prior rows", end_index,
            coverage_window));
    const auto first = static_cast<Eigen::Index>(end_index + 1 - coverage_window);
    FeatureMatrix fm;
    for (std::size_t j = 0; j < returns.n_tickers(); ++j) {
        if (returns.returns.col(static_cast<Eigen::Index>(j))
                .segment(first, static_cast<Eigen::Index>(coverage_window))
                .allFinite())
            fm.tickers.push_back(j);
    }
    if (fm.tickers.empty())
        throw EmptyUniverseError(
            fmt::format("no ticker has full coverage in the window ending {}",
                        format_date(returns.dates[end_index])));

    const auto n = static_cast<std::ptrdiff_t>(fm.tickers.size());
    fm.values.resize(n, 3);
#pragma omp parallel for schedule(static) if (n > 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto f =
            window_features(returns, end_index, fm.tickers[static_cast<std::size_t>(i)]);
        fm.values(i, 0) = f.m5;
        fm.values(i, 1) = f.m20;
        fm.values(i, 2) = f.v20;
    }
    return fm;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd &x) {
    Eigen::MatrixXd out = x;
    if (x.rows() == 0)
        return out;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        out.col(c).array() -= mean;
        const double sd =
            std::sqrt(out.col(c).squaredNorm() / static_cast<double>(x.rows()));
        if (sd > 0.0)
            out.col(c) /= sd;
    }
    return out;
}

BenchmarkSeries equal_weight_benchmark(const ReturnPanel &returns) {
    BenchmarkSeries b;
    b.dates = returns.dates;
    b.returns.resize(static_cast<Eigen::Index>(returns.n_dates()));
    for (Eigen::Index t = 0; t < returns.returns.rows(); ++t) {
        double sum = 0.0;
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < returns.returns.cols(); ++j) {
            const double r = returns.returns(t, j);
            if (std::isfinite(r)) {
                sum += r;
                ++count;
            }
        }
        if (count == 0)
            throw InsufficientDataError("no returns available on " +
                                        format_date(returns.dates[static_cast<std::size_t>(t)]));
        b.returns(t) = sum / static_cast<double>(count);
    }
    return b;
}

BenchmarkSeries load_benchmark(const std::filesystem::path &path,
                               const ReturnPanel &panel) {
    return parse_benchmark(read_file(path), panel, path.string());
}

BenchmarkSeries parse_benchmark(std::string_view text, const ReturnPanel &panel,
                                const std::string &source) {
    std::map<Date, double> closes;
    for_each_record(text, source, "date,close", 2,
                    [&](std::size_t line_no, const auto &f) {
                        auto d = parse_date_at(f[0], source, line_no);
                        if (!closes.emplace(d, parse_close(f[1], source, line_no))
                                 .second)
                            throw DataValidationError(fmt::format(
                                "{}:{}: duplicate date {}", source, line_no,
                                format_date(d)));
                    });
    auto close_on = [&](const Date &d) {
        auto it = closes.find(d);
        if (it == closes.end())
            throw DataValidationError(source + ": benchmark has no close on " +
                                      format_date(d));
        return it->second;
    };
    BenchmarkSeries b;
    b.dates = panel.dates;
    b.returns.resize(static_cast<Eigen::Index>(panel.n_dates()));
    double prev = close_on(panel.base_date);
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        const double cur = close_on(panel.dates[t]);
        b.returns(static_cast<Eigen::Index>(t)) = cur / prev - 1.0;
        prev = cur;
    }
    return b;
}

void SyntheticMarketConfig::validate() const {
    auto fail = [](const char *field, const std::string &msg) {
        throw ConfigError(std::string("synthetic.") + field, msg);
    };
    if (group_vols.empty())
        fail("group_vols", "need at least one group");
    if (n_stocks == 0 || n_stocks % n_groups() != 0)
        fail("n_stocks", fmt::format("must be a positive multiple of the group "
                                     "count {}",
                                     n_groups()));
    if (n_days < 2)
        fail("n_days", "must be at least 2");
    if (n_regimes == 0)
        fail("n_regimes", "must be at least 1");
    if (regime_length < kLongWindow + 1)
        fail("regime_length", "must be at least 21 trading days");
    if (group_drifts.size() != n_regimes)
        fail("group_drifts", "need one row per regime");
    for (const auto &row : group_drifts) {
        if (row.size() != n_groups())
            fail("group_drifts", "each row needs one drift per group");
        for (double d : row)
            if (!std::isfinite(d) || d <= -1.0)
                fail("group_drifts", "drifts must be finite and > -1");
    }
    for (double v : group_vols)
        if (!std::isfinite(v) || v < 0.0)
            fail("group_vols", "vols must be finite and >= 0");
    if (trading_days_per_month < 1 || trading_days_per_month > 28)
        fail("trading_days_per_month", "must be in [1, 28]");
    if (start_month.month < 1 || start_month.month > 12)
        fail("start_month", "invalid month");
}

PricePanel generate_synthetic_market(const SyntheticMarketConfig &cfg) {
    cfg.validate();
    const std::size_t per_group = cfg.n_stocks / cfg.n_groups();

    PricePanel panel;
    panel.dates.reserve(cfg.n_days);
    YearMonth ym = cfg.start_month;
    unsigned day = 1;
    for (std::size_t t = 0; t < cfg.n_days; ++t) {
        panel.dates.emplace_back(std::chrono::year{ym.year},
                                 std::chrono::month{ym.month},
                                 std::chrono::day{day});
        if (++day > cfg.trading_days_per_month) {
            day = 1;
            if (++ym.month > 12) {
                ym.month = 1;
                ++ym.year;
            }
        }
    }
    for (std::size_t i = 0; i < cfg.n_stocks; ++i)
        panel.tickers.push_back(fmt::format("S{:03d}", i));

    const auto n_days = static_cast<Eigen::Index>(cfg.n_days);
    const auto n_stocks = static_cast<Eigen::Index>(cfg.n_stocks);
    panel.closes.resize(n_days, n_stocks);
    panel.closes.row(0).setConstant(100.0);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index t = 1; t < n_days; ++t) {
        const auto regime =
            (static_cast<std::size_t>(t) / cfg.regime_length) % cfg.n_regimes;
        for (Eigen::Index i = 0; i < n_stocks; ++i) {
            const auto group = static_cast<std::size_t>(i) / per_group;
            const double drift = cfg.group_drifts[regime][group];
            const double vol = cfg.group_vols[group];
            const double z = normal(rng);
            double growth = 1.0 + drift;
            if (vol > 0.0)
                growth *= std::exp(vol * z - 0.5 * vol * vol);
            panel.closes(t, i) = panel.closes(t - 1, i) * growth;
        }
    }
    return panel;
}

} // namespace qa3c::market
