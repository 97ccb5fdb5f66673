#include <runtime.h>
#include <cmath>

/*templet*
~Link = +BEGIN ? ArgCos -> CALCCOS | ArgSin -> CALCSIN;
        CALCCOS ! Cos2 -> END; CALCSIN ! Sin2 -> END.

*Master =
    p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join;
    +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .

*Worker =
    p : Link ? ArgSin -> sin2 | ArgCos -> cos2;
    sin2(p?ArgSin,p!Sin2); cos2(p?ArgCos,p!Cos2) .
*end*/

int main()
{
    return 0;
}
