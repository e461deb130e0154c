#include <stdio.h>
#include <stdlib.h>
#include "src-gen/sc_types.h"
#include "src-gen/Tiny.h"
#include "testinglib/gtest/gtest.h"

class TestStateMachine: public ::testing::Test {
    protected:
        Tiny handle;
};

TEST_F(TestStateMachine, testtiny) {
    tiny_init(&handle);
    tiny_enter(&handle);

    EXPECT_TRUE(tiny_isActive(&handle, tiny_main_region_Only));
}
