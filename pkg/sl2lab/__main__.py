from sl2lab.app import main

main()
