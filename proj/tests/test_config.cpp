#include "metato/config.hpp"

#include <doctest.h>

using namespace metato;

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK(c.network(c.omega_meta).input_dim == 3);
  CHECK(count_params(c.network(c.omega_meta)) == 264449);
  CHECK(c.network(c.omega_standard).omega0 == 30.0);
  const auto m = c.meta_config();
  CHECK(m.iterations == 200);
  CHECK(m.batch_size == 5);
  CHECK(m.inner_steps == 10);
  CHECK(m.inner_lr == 1e-4);
  CHECK(m.outer_lr == 1e-6);
  const auto o = c.optimizer();
  CHECK(o.stop.eps == 1e-5);
  CHECK(o.stop.min_iters == 10);
  CHECK(o.stop.max_iters == 200);
  CHECK(o.lr == 1e-4);
  CHECK(c.pretrain_config().epochs == 100);
  CHECK(c.pretrain_config().lr == 1e-5);
  CHECK(c.mesh() == fem::Discretization{20, 20});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parse, set and serialize") {
  const RunConfig c = parse_config(
      "# a comment\n"
      "seed = 42\n"
      "  mesh.nelx=32   \n"
      "net.conditioned = false  # trailing comment\n"
      "meta.inner_lr = 3.5e-4\n"
      "out_dir = /tmp/x y\n"
      "\n");
  CHECK(c.seed == 42);
  CHECK(c.nelx == 32);
  CHECK_FALSE(c.conditioned);
  CHECK(c.network(60).input_dim == 2);
  CHECK(c.inner_lr == 3.5e-4);
  CHECK(c.out_dir == "/tmp/x y");
  CHECK(parse_config(serialize_config(c)) == c);

  RunConfig d;
  d.set("optim.lr", "0.1");
  d.set("meta.batch", "7");
  CHECK(d.get("optim.lr") == "0.1");
  CHECK(d.get("meta.batch") == "7");
  d.inner_lr = 0.1 + 0.2;
  CHECK(parse_config(serialize_config(d)) == d);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(parse_config("nope = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mesh.nelx = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("net.conditioned = maybe\n"), ConfigError);
  RunConfig c;
  c.nelx = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  RunConfig e;
  e.min_iters = 300;
  CHECK_THROWS_AS(e.validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/metato.conf"), std::exception);
}
