// Copyright 2026 The coilsense Authors
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

#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "coilsense/live_server.hpp"
#include "coilsense/live_session.hpp"
#include "fixtures.hpp"

using namespace coilsense;
using namespace coilsense::live;
using nlohmann::json;

namespace {

std::string msg(std::string type, std::uint64_t seq, json payload = json::object(),
                std::string session = "") {
  return serialize(WireMessage{std::move(type), seq, std::move(session), std::move(payload)});
}

std::vector<json> parse_all(const std::vector<std::string>& texts) {
  std::vector<json> out;
  for (const auto& t : texts) {
    out.push_back(json::parse(t));
  }
  return out;
}

std::vector<json> of_type(const std::vector<json>& msgs, std::string_view type) {
  std::vector<json> out;
  for (const auto& m : msgs) {
    if (m.at("type") == type) {
      out.push_back(m);
    }
  }
  return out;
}

json pointer(double t, double x, double y, const char* phase) {
  return {{"t", t}, {"x", x}, {"y", y}, {"phase", phase}};
}

/// Drives one connection and records every reply.
struct Client {
  explicit Client(SessionRegistry& reg) : conn(reg) {}

  std::vector<json> send(const std::string& type, json payload = json::object()) {
    auto replies = parse_all(conn.on_text(msg(type, ++seq, std::move(payload))));
    all.insert(all.end(), replies.begin(), replies.end());
    return replies;
  }

  std::vector<json> stroke(const std::vector<std::pair<double, double>>& xy, double t0,
                           double dt) {
    std::vector<json> replies;
    for (std::size_t i = 0; i < xy.size(); ++i) {
      const char* phase = i == 0 ? "down" : (i + 1 == xy.size() ? "up" : "move");
      auto r = send("pointer", pointer(t0 + dt * static_cast<double>(i), xy[i].first,
                                       xy[i].second, phase));
      replies.insert(replies.end(), r.begin(), r.end());
    }
    return replies;
  }

  Connection conn;
  std::uint64_t seq = 0;
  std::vector<json> all;
};

std::vector<std::pair<double, double>> line(double x0, double y0, double x1, double y1, int n) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / (n - 1);
    pts.emplace_back(x0 + a * (x1 - x0), y0 + a * (y1 - y0));
  }
  return pts;
}

}  // namespace

TEST_CASE("wire messages round-trip and reject malformed input") {
  const WireMessage m{"pointer", 3, "s1", {{"t", 0.5}}};
  CHECK(parse_message(serialize(m)) == m);
  const auto bare = parse_message(R"({"type":"config","seq":0})");
  CHECK(bare.session.empty());
  CHECK(bare.payload == json::object());
  CHECK_ERRC(parse_message("not json"), Errc::invalid_input);
  CHECK_ERRC(parse_message("[1]"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"seq":1})"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"type":"pointer","seq":-1})"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"type":"pointer","seq":1.5})"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"type":"teleport","seq":1})"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"type":"pointer","seq":1,"session":3})"), Errc::invalid_input);
  CHECK_ERRC(parse_message(R"({"type":"pointer","seq":1,"payload":[1]})"), Errc::invalid_input);
}

TEST_CASE("the first message must be hello") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Connection conn(reg);
  auto r = parse_all(conn.on_text(msg("pointer", 1, pointer(0, 0, 0, "down"))));
  REQUIRE(r.size() == 1);
  CHECK(r[0].at("type") == "error");
  CHECK(r[0].at("seq") == 1);
  r = parse_all(conn.on_text("{"));
  CHECK(r[0].at("type") == "error");
  CHECK(r[0].at("seq") == 2);
  CHECK(reg.size() == 0);

  r = parse_all(conn.on_text(msg("hello", 7)));
  REQUIRE(r.size() == 1);
  CHECK(r[0].at("type") == "hello");
  CHECK(r[0].at("session") == "s1");
  CHECK(r[0].at("payload").at("rows") == 3);
  CHECK(r[0].at("payload").at("config").at("pf").at("n_particles") == 1000);
  r = parse_all(conn.on_text(msg("hello", 8)));
  CHECK(r[0].at("type") == "error");
}

TEST_CASE("sequence, session and payload violations are reported without losing state") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Connection conn(reg);
  conn.on_text(msg("hello", 5));
  auto r = parse_all(conn.on_text(msg("config", 5)));
  CHECK(r[0].at("type") == "error");
  CHECK(r[0].at("payload").at("message").get<std::string>().find("seq") != std::string::npos);
  r = parse_all(conn.on_text(msg("config", 6, {}, "s9")));
  CHECK(r[0].at("type") == "error");
  r = parse_all(conn.on_text(msg("pointer", 7, {{"x", 1}})));
  CHECK(r[0].at("type") == "error");
  CHECK(r[0].at("payload").at("code") == "invalid-input");
  r = parse_all(conn.on_text(msg("pointer", 8, pointer(0, 0, 0, "hover"))));
  CHECK(r[0].at("type") == "error");
  r = parse_all(conn.on_text(msg("posterior", 9)));
  CHECK(r[0].at("type") == "error");
  r = parse_all(conn.on_text(msg("param_update", 10, {{"n_particles", 0}})));
  CHECK(r[0].at("type") == "error");
  r = parse_all(conn.on_text(msg("param_update", 11, {{"window_len", 3}})));
  CHECK(r[0].at("type") == "error");
  r = parse_all(conn.on_text(msg("param_update", 12, {{"cutoff", "high"}})));
  CHECK(r[0].at("type") == "error");
  CHECK(conn.session()->config().tracker.pf.n_particles == 1000);

  r = parse_all(conn.on_text(msg("pointer", 13, pointer(1.0, 0, 0, "down"))));
  r = parse_all(conn.on_text(msg("pointer", 14, pointer(0.5, 0, 0, "move"))));
  CHECK(r.back().at("type") == "error");
  r = parse_all(conn.on_text(msg("config", 15)));
  CHECK(r[0].at("type") == "config");
  CHECK(conn.session()->id() == "s1");

  // Outbound seq is strictly increasing across every reply kind.
  std::uint64_t last = 0;
  for (int i = 0; i < 20; ++i) {
    for (const auto& m : parse_all(conn.on_text(
             msg("pointer", 16 + i, pointer(1.0 + 0.05 * i, 0, 0, "move"))))) {
      CHECK(m.at("seq").get<std::uint64_t>() > last);
      last = m.at("seq").get<std::uint64_t>();
    }
  }
}

TEST_CASE("no pointer input means no posterior") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Client c(reg);
  c.send("hello");
  for (int i = 0; i < 10; ++i) {
    c.send("config");
  }
  CHECK(of_type(c.all, "posterior").empty());
  CHECK(of_type(c.all, "frame").empty());
}

TEST_CASE("frames follow the pad clock and posteriors follow the window stride") {
  RunConfig cfg;
  cfg.noise = sim::NoiseSpec::none();
  SessionRegistry reg(cfg, fixture::shared_tracker());
  Client c(reg);
  c.send("hello");
  c.send("pointer", pointer(2.0, 0, 0, "down"));
  c.send("pointer", pointer(3.0, 0, 0, "move"));
  const auto frames = of_type(c.all, "frame");
  CHECK(frames.size() == 51);
  CHECK(frames.front().at("payload").at("t") == doctest::Approx(2.0));
  CHECK(frames.back().at("payload").at("t") == doctest::Approx(3.0));
  CHECK(frames[1].at("payload").at("i").size() == 9);
  const auto posts = of_type(c.all, "posterior");
  CHECK(posts.size() == 10);
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i].at("payload");
    CHECK(p.at("window") == i);
    CHECK(p.at("posterior").size() == 9);
    double sum = 0.0;
    for (double v : p.at("posterior")) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("a pointer held on a coil drives the estimate to that zone") {
  const RunConfig cfg;
  for (const int k : {0, 4, 8}) {
    CAPTURE(k);
    SessionRegistry reg(cfg, fixture::shared_tracker());
    Client c(reg);
    c.send("hello");
    const auto centre = cfg.pad.coil_center(k);
    c.send("pointer", pointer(0.0, centre.x, centre.y, "down"));
    c.send("pointer", pointer(0.3, centre.x, centre.y, "move"));
    const auto posts = of_type(c.all, "posterior");
    REQUIRE(posts.size() >= 3);
    bool hit = false;
    for (std::size_t i = 0; i < 3; ++i) {
      hit = hit || posts[i].at("payload").at("map") == k;
    }
    CHECK(hit);
  }
}

TEST_CASE("param updates apply to the next posterior") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Client c(reg);
  c.send("hello");
  c.send("pointer", pointer(0.0, 0, 0, "down"));
  auto r = c.send("param_update", {{"n_particles", 250}, {"cutoff", 2.0}});
  REQUIRE(r.size() == 1);
  CHECK(r[0].at("type") == "config");
  CHECK(r[0].at("payload").at("pf").at("n_particles") == 250);
  CHECK(c.conn.session()->particles().size() == 250);
  r = c.send("pointer", pointer(0.5, 0, 0, "move"));
  const auto posts = of_type(r, "posterior");
  REQUIRE_FALSE(posts.empty());
  for (const auto& p : posts) {
    CHECK(p.at("payload").at("n_particles") == 250);
  }
}

TEST_CASE("each stroke yields exactly one gesture") {
  const RunConfig cfg;
  SessionRegistry reg(cfg, fixture::shared_tracker());
  Client c(reg);
  c.send("hello");
  const double h = cfg.pad.pitch;
  auto r = c.stroke(line(-h, 0, h, 0, 11), 0.0, 0.1);
  CHECK(of_type(r, "gesture").size() == 1);
  r = c.stroke(line(0, -h, 0, h, 11), 3.0, 0.1);
  CHECK(of_type(r, "gesture").size() == 1);
  r = c.stroke({{0, 0}, {0, 0}}, 6.0, 0.0);
  const auto tap = of_type(r, "gesture");
  REQUIRE(tap.size() == 1);
  CHECK(tap[0].at("payload").at("label") == "tap");
  // Moves without a press never produce a gesture.
  r = c.send("pointer", pointer(7.0, 0, 0, "move"));
  r = c.send("pointer", pointer(8.0, h, 0, "up"));
  CHECK(of_type(r, "gesture").empty());
}

TEST_CASE("replaying the same input gives identical output") {
  const RunConfig cfg;
  auto run_once = [&] {
    SessionRegistry reg(cfg, fixture::shared_tracker());
    Client c(reg);
    c.send("hello");
    c.stroke(line(-40, -40, 40, 40, 15), 0.0, 0.07);
    std::vector<std::string> texts;
    for (const auto& m : c.all) {
      texts.push_back(m.dump());
    }
    return texts;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("sessions get distinct ids, resume, and expire after the ttl") {
  RunConfig cfg;
  cfg.live.session_ttl = 5.0;
  double now = 100.0;
  SessionRegistry reg(cfg, fixture::shared_tracker(), [&] { return now; });
  {
    Connection a(reg);
    Connection b(reg);
    CHECK(json::parse(a.on_text(msg("hello", 1))[0]).at("session") == "s1");
    CHECK(json::parse(b.on_text(msg("hello", 1))[0]).at("session") == "s2");
    CHECK(reg.size() == 2);
  }
  CHECK(reg.size() == 2);
  now += 4.0;
  CHECK(reg.purge() == 0);
  {
    Connection a(reg);
    const auto hello = json::parse(a.on_text(msg("hello", 1, {{"session", "s1"}}))[0]);
    CHECK(hello.at("session") == "s1");
    now += 2.0;
    CHECK(reg.purge() == 1);
    CHECK(reg.contains("s1"));
    CHECK_FALSE(reg.contains("s2"));
    Connection d(reg);
    CHECK(json::parse(d.on_text(msg("hello", 1, {{"session", "s1"}}))[0]).at("session") == "s3");
  }
  now += 5.0;
  CHECK(reg.purge() == 2);
  CHECK(reg.size() == 0);
}

TEST_CASE("sessions are isolated from each other") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Client a(reg);
  Client b(reg);
  a.send("hello");
  b.send("hello");
  a.send("param_update", {{"n_particles", 64}, {"gesture_confidence", 0.5}});
  a.send("pointer", pointer(0.0, -40, 0, "down"));
  b.send("pointer", pointer(0.0, 40, 40, "down"));
  const auto pa = of_type(a.send("pointer", pointer(0.4, -40, 0, "move")), "posterior");
  const auto pb = of_type(b.send("pointer", pointer(0.4, 40, 40, "move")), "posterior");
  REQUIRE_FALSE(pa.empty());
  REQUIRE_FALSE(pb.empty());
  CHECK(pa.back().at("payload").at("n_particles") == 64);
  CHECK(pb.back().at("payload").at("n_particles") == 1000);
  CHECK(b.conn.session()->config().live.gesture_confidence == 0.0);
  for (const auto& m : a.all) CHECK(m.at("session") == "s1");
  for (const auto& m : b.all) CHECK(m.at("session") == "s2");
}

TEST_CASE("the frame buffer stays bounded across long gaps") {
  SessionRegistry reg(RunConfig{}, fixture::shared_tracker());
  Client c(reg);
  c.send("hello");
  c.send("pointer", pointer(0.0, 0, 0, "down"));
  const auto before = c.all.size();
  c.send("pointer", pointer(600.0, 0, 0, "move"));
  const auto& s = *c.conn.session();
  CHECK(s.buffered_frames() <= s.buffer_capacity());
  CHECK(s.dropped_frames() > 0);
  CHECK(c.all.size() - before <= 2 * s.buffer_capacity());
  auto r = c.send("pointer", pointer(600.5, 0, 0, "move"));
  CHECK_FALSE(of_type(r, "posterior").empty());
}

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

http::response<http::string_body> http_get(unsigned short port, const std::string& target,
                                           http::verb verb = http::verb::get) {
  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(stream, buf, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return res;
}

}  // namespace

TEST_CASE("server routes http and websocket traffic") {
  fixture::TempDir dir;
  std::filesystem::create_directories(dir.path() / "ui");
  {
    std::ofstream(dir.path() / "ui" / "index.html") << "<html>pad</html>";
    std::ofstream(dir.path() / "secret.txt") << "no";
  }
  ServerOptions opts;
  opts.port = 0;
  opts.static_dir = dir.path() / "ui";
  RunConfig cfg;
  cfg.noise = sim::NoiseSpec::none();
  LiveServer server(cfg, fixture::shared_tracker(), opts);
  const auto port = server.start();
  REQUIRE(port != 0);

  auto res = http_get(port, "/healthz");
  CHECK(res.result() == http::status::ok);
  CHECK(res.body() == "ok");
  res = http_get(port, "/api/config");
  CHECK(res.result() == http::status::ok);
  CHECK(json::parse(res.body()).at("pad").at("rows") == 3);
  res = http_get(port, "/");
  CHECK(res.result() == http::status::ok);
  CHECK(res.body() == "<html>pad</html>");
  CHECK(std::string(res[http::field::content_type]).find("text/html") == 0);
  CHECK(http_get(port, "/../secret.txt").result() != http::status::ok);
  CHECK(http_get(port, "/missing.js").result() == http::status::not_found);
  CHECK(http_get(port, "/ws").result() == http::status::not_found);
  CHECK(http_get(port, "/api/config", http::verb::post).result() ==
        http::status::method_not_allowed);

  {
    boost::asio::io_context ioc;
    tcp::resolver resolver(ioc);
    websocket::stream<tcp::socket> ws(ioc);
    boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", "/ws");
    auto read = [&] {
      beast::flat_buffer buf;
      ws.read(buf);
      return json::parse(beast::buffers_to_string(buf.data()));
    };
    ws.write(boost::asio::buffer(msg("hello", 1)));
    const auto hello = read();
    CHECK(hello.at("type") == "hello");
    CHECK(hello.at("session") == "s1");
    ws.write(boost::asio::buffer(msg("pointer", 2, pointer(0.0, 0, 0, "down"))));
    CHECK(read().at("type") == "frame");
    ws.write(boost::asio::buffer(msg("pointer", 3, pointer(0.2, 0, 0, "up"))));
    int posteriors = 0;
    bool gesture = false;
    while (!gesture) {
      const auto m = read();
      posteriors += m.at("type") == "posterior" ? 1 : 0;
      gesture = m.at("type") == "gesture";
    }
    CHECK(posteriors == 2);
    ws.close(websocket::close_code::normal);
  }
  CHECK(server.registry().contains("s1"));

  // A client that never closes must not block shutdown.
  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  websocket::stream<tcp::socket> idle(ioc);
  boost::asio::connect(idle.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
  idle.handshake("127.0.0.1", "/ws");
  server.stop();
  beast::error_code ec;
  boost::asio::ip::tcp::socket probe(ioc);
  probe.connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port), ec);
  CHECK(ec);
}

TEST_CASE("server rejects an occupied port") {
  ServerOptions opts;
  opts.port = 0;
  LiveServer a(RunConfig{}, fixture::shared_tracker(), opts);
  opts.port = a.start();
  LiveServer b(RunConfig{}, fixture::shared_tracker(), opts);
  CHECK_THROWS(b.start());
  a.stop();
}
