#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aif/config.hpp"
#include "aif/runner.hpp"

using namespace aif;

TEST_CASE("serialize and parse round-trip") {
    RunConfig a;
    a.experiment = "reach";
    a.n_trials = 17;
    a.seed = 123456789012345ull;
    a.ctoas = {0, 30, 90};
    a.mode = "bottom_up";
    a.model.agent.gamma_vis = 1.0 / 3.0;
    a.model.agent.fixed_precision = true;
    a.model.agent.gains.track = 0.0123456789;
    a.model.renderer.blob_sigma = 0.1;
    a.model.task.max_steps = 77;
    a.model.visual_dim = 5;

    RunConfig b;
    apply_config_text(b, serialize(a));
    CHECK(serialize(b) == serialize(a));
    CHECK(b.seed == a.seed);
    CHECK(b.ctoas == a.ctoas);
    CHECK(b.model.agent.gamma_vis == a.model.agent.gamma_vis);
    CHECK(b.model.agent.gains.track == a.model.agent.gains.track);
    CHECK(b.model.visual_dim == 5);
}

TEST_CASE("every registered key is serialized") {
    RunConfig rc;
    const std::string text = serialize(rc);
    for (const auto& p : params(rc)) CHECK_MESSAGE(text.find(p.key + " = ") != std::string::npos, p.key);
}

TEST_CASE("comments, blank lines and meta keys") {
    RunConfig rc;
    apply_config_text(rc, "# header\n\n  run.n = 12   # trailing\nmeta.code_version = whatever\n");
    CHECK(rc.n_trials == 12);
}

TEST_CASE("bad input is a usage error") {
    RunConfig rc;
    CHECK_THROWS_AS(apply_config_text(rc, ""), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "# only a comment\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.n 12\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.bogus = 1\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.n = twelve\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.n = 12x\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.trace = maybe\n"), UsageError);
    CHECK_THROWS_AS(apply_config_text(rc, "run.ctoas = \n"), UsageError);
    CHECK_THROWS_AS(apply_config_file(rc, "/nonexistent/cfg.txt"), UsageError);
    try {
        apply_config_text(rc, "run.n = 3\nrun.seed = x\n", "cfg");
        FAIL("expected an error");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
    }
}

TEST_CASE("validation") {
    RunConfig rc;
    CHECK_NOTHROW(rc.validate());
    rc.experiment = "nope";
    CHECK_THROWS_AS(rc.validate(), UsageError);
    rc = {};
    rc.n_trials = 0;
    CHECK_THROWS_AS(rc.validate(), UsageError);
    rc = {};
    rc.cue = "sideways";
    CHECK_THROWS_AS(rc.validate(), UsageError);
    rc = {};
    set_param(rc, "agent.gamma_vis", "-1");
    CHECK_THROWS_AS(rc.validate(), UsageError);
    rc = {};
    set_param(rc, "model.visual_dim", "2");
    CHECK_THROWS_AS(rc.validate(), UsageError);
}

TEST_CASE("single-trial runs must name one condition") {
    RunConfig rc;
    rc.experiment = "single-trial";
    rc.task = "posner";
    CHECK_THROWS_AS(execute(rc, 1), UsageError);
    rc.task = "reach";
    CHECK_THROWS_AS(execute(rc, 1), UsageError);
}

TEST_CASE("manifest reproduces the configuration") {
    RunConfig rc;
    rc.experiment = "single-trial";
    rc.static_steps = 5;
    rc.model.agent.gamma_vis = 2e4;
    auto out = execute(rc, 1);
    RunConfig back;
    apply_config_text(back, out.manifest);
    CHECK(serialize(back) == serialize(rc));
    CHECK(out.manifest.find("meta.schema_trials = trials/v1") != std::string::npos);
    CHECK(out.trace_csv.rfind("step,free_energy,", 0) == 0);
}
