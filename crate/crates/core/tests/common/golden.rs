//! Reference values for the six eigenvalue tables, indexed `[mu - 1][p - 1]`.

#![allow(clippy::excessive_precision)]

pub const TRIANGLE: [[f64; 12]; 4] = [
    [
        0.917136664350836,
        0.951669246453928,
        0.964185270379702,
        0.968240261180467,
        0.966806486169801,
        0.959408791893528,
        0.943501297553834,
        0.913475197477444,
        0.859176805106264,
        0.762190410650697,
        0.589258437047241,
        0.279511860034300,
    ],
    [
        0.658493649053890,
        0.800813482191006,
        0.852396026216779,
        0.869107942296914,
        0.863198896177376,
        0.832710628261139,
        0.767150748223897,
        0.643403571141314,
        0.419622502039389,
        0.019910501521261,
        -0.692797559342644,
        -1.969362428534202,
    ],
    [
        0.192692294634035,
        0.529130834062903,
        0.651069958003112,
        0.690576276364528,
        0.676607521609456,
        0.604534444362571,
        0.449553442778550,
        0.157019938498792,
        -0.371989788261829,
        -1.316893380981366,
        -3.001707463114409,
        -6.019457067017003,
    ],
    [
        -0.536778579257494,
        0.103660669859525,
        0.335782117975507,
        0.410985740336119,
        0.384395032798194,
        0.247197827175128,
        -0.047821632992457,
        -0.604683929864082,
        -1.611698740822758,
        -3.410402743154268,
        -6.617589017041926,
        -12.362130928403941,
    ],
];

pub const PARALLELOGRAM: [[f64; 10]; 4] = [
    [
        0.757359312880714,
        0.909009742330268,
        0.944316491021463,
        0.956248179064318,
        0.958418441371873,
        0.952907970706445,
        0.935573718078176,
        0.890974043187541,
        0.773040724644832,
        0.445576028516330,
    ],
    [
        0.000000000000000,
        0.625000000000000,
        0.770510421645976,
        0.819684730309997,
        0.828629076508982,
        0.805918661652962,
        0.734478653655678,
        0.550669106212760,
        0.064628121319203,
        -1.284958792632702,
    ],
    [
        -1.363961030678928,
        0.113514613495402,
        0.457495579824147,
        0.573741729216471,
        0.594885815075774,
        0.541199279365591,
        0.372317884428622,
        -0.062200722793164,
        -1.211182670394353,
        -4.401553542490907,
    ],
    [
        -3.500000000000000,
        -0.687500000000000,
        -0.032703102593110,
        0.188581286394985,
        0.228830844290421,
        0.126633977438330,
        -0.194846058549442,
        -1.021989022042573,
        -3.209173454063614,
        -9.282314566847294,
    ],
];

pub const GENERAL_QUAD: [[f64; 10]; 4] = [
    [
        0.747149409107802,
        0.905648684583979,
        0.942338691490434,
        0.954647079121367,
        0.956761324592774,
        0.950779093984766,
        0.932233847358632,
        0.884721376019483,
        0.759489811676522,
        0.412406997710229,
    ],
    [
        -0.042078284125092,
        0.611148004334341,
        0.762359276203259,
        0.813086084543036,
        0.821799567415631,
        0.797144878710977,
        0.720713976514372,
        0.524899861811526,
        0.008780468029065,
        -1.421658994070072,
    ],
    [
        -1.463432454588482,
        0.080769035544651,
        0.438226589642168,
        0.558142787768123,
        0.578741121720422,
        0.520458398399101,
        0.339778724066694,
        -0.123118212347723,
        -1.343204346427102,
        -4.724707491574776,
    ],
    [
        -3.689352278562916,
        -0.749833980495465,
        -0.069383257085339,
        0.158887380443665,
        0.198098053370336,
        0.087151954199392,
        -0.256787105685328,
        -1.137950621848126,
        -3.460487893869209,
        -9.897465473315364,
    ],
];

pub const BLUE_QUAD: [[f64; 10]; 4] = [
    [
        0.752122198173689,
        0.907368513818204,
        0.943368537006528,
        0.955486626928499,
        0.957630538869594,
        0.951888510846911,
        0.933947667570817,
        0.887854856425997,
        0.766127960891231,
        0.428435362614456,
    ],
    [
        -0.021583827383621,
        0.618235971544799,
        0.766603599479458,
        0.816546129999960,
        0.825381877897596,
        0.801717140994429,
        0.727777178620049,
        0.537813938357047,
        0.036138407431271,
        -1.355600967716399,
    ],
    [
        -1.414984357506708,
        0.097524713816906,
        0.448260004468708,
        0.566322200392669,
        0.587209564099582,
        0.531267048259225,
        0.356475858596323,
        -0.092589838646902,
        -1.278531243800609,
        -4.568548891511071,
    ],
    [
        -3.597127223226294,
        -0.717938128048401,
        -0.050283802342439,
        0.174457584999823,
        0.214218450539184,
        0.107727134474930,
        -0.225002696209782,
        -1.079837277393274,
        -3.337377166559288,
        -9.600204354723619,
    ],
];

pub const ONE_HANGING: [[f64; 5]; 4] = [
    [
        0.5713583436501,
        0.5111112137989,
        -0.4908310649897,
        -5.0403752099103,
        -28.0738045059095,
    ],
    [
        -0.7665695784117,
        -1.0321608739122,
        -5.1703397243886,
        -23.9128701137892,
        -118.8224619748803,
    ],
    [
        -3.1761016413483,
        -3.8842461768688,
        -13.7037380407129,
        -57.9779496110135,
        -282.2556307086560,
    ],
    [
        -6.9495631028529,
        -8.5676118293778,
        -27.3679339412646,
        -111.5515607551863,
        -538.2010788870381,
    ],
];

pub const TWO_HANGING: [[f64; 5]; 4] = [
    [
        0.3509421918476,
        0.1968076252802,
        -1.3306311581102,
        -8.3677990882113,
        -42.9093635066812,
    ],
    [
        -1.6749751488843,
        -2.3102130737245,
        -8.6052776052544,
        -37.6077009566311,
        -179.9645530924988,
    ],
    [
        -5.3235370099972,
        -6.8252147095288,
        -21.7065019476733,
        -90.2671005455771,
        -426.7931514447289,
    ],
    [
        -11.0373881699796,
        -13.8959588317600,
        -42.2237492236424,
        -172.7346543048027,
        -813.3404889159924,
    ],
];
