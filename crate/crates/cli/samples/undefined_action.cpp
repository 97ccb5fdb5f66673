/*templet*
~Link = +BEGIN? Request -> PROCESSING; PROCESSING! Response -> BEGIN.
*Server = p:Link ? Request -> serve; handle(p?Request, p!Response).
*end*/
