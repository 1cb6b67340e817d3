// Generated by ultgen for class A. Edit only inside ULTGEN-ANCHOR regions.
#pragma once

class MOCK_C : public C
{
public:
    void SetVariable1(int value);
    void SetVariable2(int value);
};

inline void MOCK_C::SetVariable1(int value)
{
    variable1 = value;
}

inline void MOCK_C::SetVariable2(int value)
{
    variable2 = value;
}
