// Generated by ultgen for class A. Edit only inside ULTGEN-ANCHOR regions.
#include "test_A.h"

class A_TestCase : public testing::Test
{
public:
    virtual void SetUp();
    virtual void TearDown();
    Test_A *testA;
};

void A_TestCase::SetUp()
{
    testA = new Test_A();
    // ULTGEN-ANCHOR: SetUpBody
    // ULTGEN-END
}

void A_TestCase::TearDown()
{
    // ULTGEN-ANCHOR: TearDownBody
    // ULTGEN-END
    delete testA;
}

TEST_F(A_TestCase, func1)
{
    testA->func1Test();
}

TEST_F(A_TestCase, func2)
{
    testA->func2Test();
}
